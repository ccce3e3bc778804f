#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "hnls/grid.hpp"
#include "hnls/hermite.hpp"
#include "hnls/multi_index.hpp"
#include "hnls/stats.hpp"

namespace hnls {

namespace detail {

// phi_n(x_i)^2 per axis of a point, degrees 0..mmax.
inline std::array<std::vector<double>, 3> point_sq_tables(int mmax,
                                                          std::span<const double> x, int d) {
  std::array<std::vector<double>, 3> t;
  std::vector<double> col(static_cast<std::size_t>(mmax) + 1);
  for (int ax = 0; ax < d; ++ax) {
    hermite_eval_range(mmax, x[static_cast<std::size_t>(ax)], col);
    auto& v = t[static_cast<std::size_t>(ax)];
    v.resize(col.size());
    for (std::size_t n = 0; n < col.size(); ++n) v[n] = col[n] * col[n];
  }
  return t;
}

inline double shell_value(int m, const std::array<std::vector<double>, 3>& t, int d) {
  if (m < 0) return 0.0;
  if (d == 1) return t[0][static_cast<std::size_t>(m)];
  if (d == 2) {
    double s = 0.0;
    for (int a = 0; a <= m; ++a)
      s += t[0][static_cast<std::size_t>(a)] * t[1][static_cast<std::size_t>(m - a)];
    return s;
  }
  double s = 0.0;
  for (int a = 0; a <= m; ++a)
    for (int b = 0; b <= m - a; ++b)
      s += t[0][static_cast<std::size_t>(a)] * t[1][static_cast<std::size_t>(b)] *
           t[2][static_cast<std::size_t>(m - a - b)];
  return s;
}

// phi_n(x_k)^2 on the grid axis, degrees 0..mmax.
inline Eigen::MatrixXd axis_sq_table(const QuadratureGrid& grid, int mmax) {
  const int n = grid.nodes_per_axis();
  Eigen::MatrixXd t(mmax + 1, n);
  std::vector<double> col(static_cast<std::size_t>(mmax) + 1);
  for (int k = 0; k < n; ++k) {
    hermite_eval_range(mmax, grid.axis_nodes()[static_cast<std::size_t>(k)], col);
    for (int m = 0; m <= mmax; ++m) t(m, k) = col[static_cast<std::size_t>(m)] * col[static_cast<std::size_t>(m)];
  }
  return t;
}

}  // namespace detail

/// Diagonal spectral function pi_H(lambda; x, x) = sum_{lambda_n <= lambda}
/// prod_i phi_{l_i}(x_i)^2.
inline double spectral_diag(double lambda, std::span<const double> x, int d) {
  check_dim(d);
  if (lambda < 0) throw std::invalid_argument("spectral_diag: lambda must be >= 0");
  if (lambda < d) return 0.0;
  const int mmax = static_cast<int>(std::floor((lambda - d) / 2.0));
  const auto t = detail::point_sq_tables(mmax, x, d);
  double s = 0.0;
  for (int m = 0; m <= mmax; ++m) s += detail::shell_value(m, t, d);
  return s;
}

/// Sum over the cluster shell |l| = m of prod phi^2 at every grid node.
inline std::vector<double> shell_function_on_grid(int m, const QuadratureGrid& grid) {
  const int d = grid.dim();
  const int n = grid.nodes_per_axis();
  const Eigen::MatrixXd t = detail::axis_sq_table(grid, m);
  std::vector<double> out(grid.num_nodes(), 0.0);
  if (d == 1) {
    for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = t(m, k);
  } else if (d == 2) {
    Eigen::Map<Eigen::MatrixXd> q(out.data(), n, n);  // (k2, k1)
    for (int a = 0; a <= m; ++a)
      q.noalias() += t.row(m - a).transpose() * t.row(a);
  } else {
    for (int a = 0; a <= m; ++a) {
      const int qdeg = m - a;
      Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);  // (k3, k2)
      for (int b = 0; b <= qdeg; ++b) r.noalias() += t.row(qdeg - b).transpose() * t.row(b);
      for (int k1 = 0; k1 < n; ++k1) {
        Eigen::Map<Eigen::MatrixXd> slab(out.data() + static_cast<std::ptrdiff_t>(k1) * n * n, n, n);
        slab.noalias() += t(a, k1) * r;
      }
    }
  }
  return out;
}

struct IncrementNorm {
  double norm = 0.0;
  double tail_fraction = 0.0;  // share of the L^r mass on the outer 10% of nodes
  bool truncated = false;      // tail_fraction > 1e-8
};

/// || pi_H(lambda+mu; x, x) - pi_H(lambda; x, x) ||_{L^r} by lifted-weight
/// quadrature (grid max for r = inf).
inline IncrementNorm cluster_increment_norm(double lambda, double mu, double r, int d,
                                            const QuadratureGrid& grid) {
  if (lambda < 1.0) throw std::invalid_argument("cluster_increment_norm: lambda >= 1");
  if (r < 1.0) throw std::invalid_argument("cluster_increment_norm: r >= 1");
  if (grid.dim() != d) throw std::invalid_argument("cluster_increment_norm: grid dim mismatch");
  const double lo = std::min(lambda, lambda + mu);
  const double hi = std::max(lambda, lambda + mu);
  // eigenvalue shells 2m + d in (lo, hi]
  std::vector<double> diff(grid.num_nodes(), 0.0);
  for (int m = 0; 2 * m + d <= hi; ++m) {
    if (2 * m + d <= lo) continue;
    auto q = shell_function_on_grid(m, grid);
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] += q[k];
  }
  IncrementNorm out;
  if (std::isinf(r)) {
    for (double v : diff) out.norm = std::max(out.norm, v);
    return out;
  }
  const auto& w = grid.flat_lifted_weights();
  const double edge = 0.9 * grid.axis_nodes().back();
  double acc = 0.0, tail = 0.0;
  for (std::size_t k = 0; k < diff.size(); ++k) {
    const double term = w[k] * std::pow(diff[k], r);
    acc += term;
    const auto x = grid.node(k);
    double rad2 = 0.0;
    for (int ax = 0; ax < d; ++ax) rad2 += x[static_cast<std::size_t>(ax)] * x[static_cast<std::size_t>(ax)];
    if (rad2 > edge * edge) tail += term;
  }
  out.norm = std::pow(acc, 1.0 / r);
  out.tail_fraction = acc > 0 ? tail / acc : 0.0;
  out.truncated = out.tail_fraction > 1e-8;
  return out;
}

struct ClusterDifference {
  double sum = 0.0;    // sum over I(j) of |phi_n(x) - phi_n(y)|^2
  double ratio = 0.0;  // sum / (|x-y|^2 j)
};

inline ClusterDifference cluster_difference_bound(int j, std::span<const double> x,
                                                  std::span<const double> y, int d) {
  if (j < 1) throw std::invalid_argument("cluster_difference_bound: j >= 1");
  const int m = cluster_shell_level(j, d);
  ClusterDifference out;
  if (m < 0) return out;
  bool same = true;
  for (int ax = 0; ax < d; ++ax)
    same = same && x[static_cast<std::size_t>(ax)] == y[static_cast<std::size_t>(ax)];
  if (same) return out;
  std::array<std::vector<double>, 3> tx, ty;
  std::vector<double> col(static_cast<std::size_t>(m) + 1);
  for (int ax = 0; ax < d; ++ax) {
    hermite_eval_range(m, x[static_cast<std::size_t>(ax)], col);
    tx[static_cast<std::size_t>(ax)] = col;
    hermite_eval_range(m, y[static_cast<std::size_t>(ax)], col);
    ty[static_cast<std::size_t>(ax)] = col;
  }
  double dist2 = 0.0;
  for (int ax = 0; ax < d; ++ax) {
    const double dx = x[static_cast<std::size_t>(ax)] - y[static_cast<std::size_t>(ax)];
    dist2 += dx * dx;
  }
  for (const auto& mi : enumerate_shell(m, d)) {
    double px = 1.0, py = 1.0;
    for (int ax = 0; ax < d; ++ax) {
      px *= tx[static_cast<std::size_t>(ax)][static_cast<std::size_t>(mi[ax])];
      py *= ty[static_cast<std::size_t>(ax)][static_cast<std::size_t>(mi[ax])];
    }
    out.sum += (px - py) * (px - py);
  }
  out.ratio = dist2 > 0 ? out.sum / (dist2 * j) : 0.0;
  return out;
}

struct MehlerSample {
  double lambda;
  double radius;
  double value;
};

struct MehlerFit {
  double log_c = 0.0;            // envelope constant (log C)
  double growth_exponent = 0.0;  // coefficient of log lambda (expect d/2)
  double decay_c = 0.0;          // coefficient of |x|^2/lambda (expect > 0)
  double origin_exponent = 0.0;  // 1-parameter fit at x = 0
  int violations = 0;            // samples above the fitted envelope
  std::vector<MehlerSample> samples;
};

/// Fit log pi_H(lambda; x, x) <= log C + a log lambda - c |x|^2 / lambda over
/// the sampled (lambda, |x|) set, then lift C to make it an upper envelope.
inline MehlerFit verify_mehler_bound(std::span<const double> lambdas,
                                     std::span<const double> radii, int d) {
  check_dim(d);
  MehlerFit fit;
  std::vector<double> lx, lf, rr;
  for (double lam : lambdas) {
    for (double rho : radii) {
      std::array<double, 3> x{rho, 0.0, 0.0};
      const double v = spectral_diag(lam, std::span<const double>(x.data(), static_cast<std::size_t>(d)), d);
      fit.samples.push_back({lam, rho, v});
      if (v > 0.0) {
        lx.push_back(std::log(lam));
        rr.push_back(rho * rho / lam);
        lf.push_back(std::log(v));
      }
    }
  }
  if (lx.size() < 3) throw std::runtime_error("verify_mehler_bound: degenerate fit (all-zero samples)");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(lx.size()), 3);
  Eigen::VectorXd b(static_cast<Eigen::Index>(lx.size()));
  for (std::size_t i = 0; i < lx.size(); ++i) {
    a(static_cast<Eigen::Index>(i), 0) = 1.0;
    a(static_cast<Eigen::Index>(i), 1) = lx[i];
    a(static_cast<Eigen::Index>(i), 2) = -rr[i];
    b(static_cast<Eigen::Index>(i)) = lf[i];
  }
  Eigen::VectorXd coef = least_squares(a, b);
  double max_resid = 0.0;
  for (Eigen::Index i = 0; i < b.size(); ++i)
    max_resid = std::max(max_resid, b(i) - (a.row(i) * coef)(0));
  fit.log_c = coef(0) + max_resid;
  fit.growth_exponent = coef(1);
  fit.decay_c = coef(2);
  for (Eigen::Index i = 0; i < b.size(); ++i)
    if (b(i) > fit.log_c + coef(1) * a(i, 1) + coef(2) * a(i, 2) + 1e-12) ++fit.violations;

  // slope of log pi(lambda; 0) in log lambda
  std::vector<double> ox, oy, ow;
  for (const auto& s : fit.samples)
    if (s.radius == 0.0 && s.value > 0.0) {
      ox.push_back(std::log(s.lambda));
      oy.push_back(std::log(s.value));
      ow.push_back(1.0);
    }
  fit.origin_exponent = weighted_linear_fit(ox, oy, ow).slope;
  return fit;
}

/// Log-log slope of the cluster increment norm along eigen-anchored lambdas
/// (lambda = 2m + d - 1, mu = 1, so each window captures one shell).
struct IncrementFit {
  LinearFit fit;
  std::vector<double> lambdas;
  std::vector<double> norms;
  bool any_truncated = false;
};

inline IncrementFit increment_norm_fit(double lambda_min, double lambda_max, double r,
                                       int d, const QuadratureGrid& grid) {
  IncrementFit out;
  std::vector<double> lx, ly, w;
  for (int m = 0;; ++m) {
    const double anchor = 2 * m + d - 1;
    if (anchor > lambda_max) break;
    if (anchor < lambda_min) continue;
    const auto inc = cluster_increment_norm(anchor, 1.0, r, d, grid);
    out.any_truncated = out.any_truncated || inc.truncated;
    out.lambdas.push_back(anchor);
    out.norms.push_back(inc.norm);
    if (inc.norm > 0.0) {
      lx.push_back(std::log(anchor));
      ly.push_back(std::log(inc.norm));
      w.push_back(1.0);
    }
  }
  out.fit = weighted_linear_fit(lx, ly, w);
  return out;
}

}  // namespace hnls
