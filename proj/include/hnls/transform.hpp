#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "hnls/field.hpp"
#include "hnls/grid.hpp"
#include "hnls/hermite.hpp"

namespace hnls {

namespace detail {

using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using CVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;

}  // namespace detail

/// Quadrature realization of the Hermite expansion: forward is
/// c_l = sum_k lifted_w_k f(x_k) phi_l(x_k), inverse is pointwise synthesis.
/// The round trip is the identity on span{|l| <= L} whenever the grid
/// integrates per-axis degree 2L exactly.
class HermiteTransform {
 public:
  HermiteTransform(QuadratureGrid grid, int max_level)
      : grid_(std::move(grid)), max_level_(max_level) {
    if (grid_.exactness_degree() < 2 * max_level_)
      throw GridError("HermiteTransform: grid exactness degree " +
                      std::to_string(grid_.exactness_degree()) +
                      " below 2L = " + std::to_string(2 * max_level_));
    const int n = grid_.nodes_per_axis();
    Eigen::MatrixXd vand(max_level_ + 1, n);
    std::vector<double> col(static_cast<std::size_t>(max_level_) + 1);
    for (int k = 0; k < n; ++k) {
      hermite_eval_range(max_level_, grid_.axis_nodes()[static_cast<std::size_t>(k)], col);
      for (int m = 0; m <= max_level_; ++m) vand(m, k) = col[static_cast<std::size_t>(m)];
    }
    Eigen::MatrixXd vandw = vand;
    for (int k = 0; k < n; ++k)
      vandw.col(k) *= grid_.axis_lifted_weights()[static_cast<std::size_t>(k)];
    vand_ = vand;
    vand_c_ = vand.cast<cplx>();
    vandw_c_ = vandw.cast<cplx>();
  }

  const QuadratureGrid& grid() const { return grid_; }
  int max_level() const { return max_level_; }
  int dim() const { return grid_.dim(); }

  /// Samples on the flattened tensor grid -> coefficients on |l| <= L.
  SpectralField forward(std::span<const cplx> samples) const {
    if (samples.size() != grid_.num_nodes())
      throw std::invalid_argument("forward: sample count mismatch");
    const int n = grid_.nodes_per_axis();
    const int L1 = max_level_ + 1;
    SpectralField out(dim(), max_level_);
    if (dim() == 1) {
      Eigen::Map<const detail::CVec> s(samples.data(), n);
      detail::CVec c = vandw_c_ * s;
      for (int m = 0; m < L1; ++m) out[static_cast<std::size_t>(m)] = c[m];
    } else if (dim() == 2) {
      Eigen::Map<const detail::CMat> s(samples.data(), n, n);  // (k2, k1)
      detail::CMat t = vandw_c_ * s;                           // (l2, k1)
      detail::CMat c = t * vandw_c_.transpose();               // (l2, l1)
      pack_box(c, out);
    } else {
      Eigen::Map<const detail::CMat> s(samples.data(), n, n * n);  // (k3, k2 + n k1)
      detail::CMat a = vandw_c_ * s;                               // (l3, k2 + n k1)
      detail::CMat b(L1 * L1, n);                                  // (l3 + L1 l2, k1)
      for (int k1 = 0; k1 < n; ++k1) {
        Eigen::Map<const detail::CMat> slice(
            a.data() + static_cast<std::ptrdiff_t>(k1) * L1 * n, L1, n);
        Eigen::Map<detail::CMat>(b.data() + static_cast<std::ptrdiff_t>(k1) * L1 * L1,
                                 L1, L1) = slice * vandw_c_.transpose();
      }
      detail::CMat c = b * vandw_c_.transpose();  // (l3 + L1 l2, l1)
      pack_box3(c, out);
    }
    return out;
  }

  /// Coefficients -> samples on the flattened tensor grid.
  std::vector<cplx> inverse(const SpectralField& f) const {
    require_field(f);
    const int n = grid_.nodes_per_axis();
    const int L1 = max_level_ + 1;
    std::vector<cplx> samples(grid_.num_nodes());
    if (dim() == 1) {
      detail::CVec c(L1);
      for (int m = 0; m < L1; ++m) c[m] = f[static_cast<std::size_t>(m)];
      Eigen::Map<detail::CVec>(samples.data(), n) = vand_c_.transpose() * c;
    } else if (dim() == 2) {
      detail::CMat c = unpack_box(f);                  // (l2, l1)
      detail::CMat t = vand_c_.transpose() * c;        // (k2, l1)
      Eigen::Map<detail::CMat>(samples.data(), n, n) = t * vand_c_;  // (k2, k1)
    } else {
      detail::CMat c = unpack_box3(f);  // (l3 + L1 l2, l1)
      detail::CMat b = c * vand_c_;     // (l3 + L1 l2, k1)
      detail::CMat a(L1 * n, n);        // (l3 + L1 k2, k1)
      for (int k1 = 0; k1 < n; ++k1) {
        Eigen::Map<const detail::CMat> slice(
            b.data() + static_cast<std::ptrdiff_t>(k1) * L1 * L1, L1, L1);
        Eigen::Map<detail::CMat>(a.data() + static_cast<std::ptrdiff_t>(k1) * L1 * n,
                                 L1, n) = slice * vand_c_;
      }
      Eigen::Map<detail::CMat>(samples.data(), n, n * n) =
          vand_c_.transpose() * Eigen::Map<const detail::CMat>(a.data(), L1, n * n);
    }
    return samples;
  }

  /// ||H^{sigma/2} u||_{L^r}: spectral multiplier, synthesis, discrete L^r
  /// norm. r = inf is the grid max (refine the grid to trust it).
  double wsp_norm(const SpectralField& f, double sigma, double r) const {
    require_field(f);
    if (r < 1.0) throw std::invalid_argument("wsp_norm: need r >= 1");
    SpectralField g = f;
    if (sigma != 0.0)
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] *= std::pow(static_cast<double>(g.modes().lambda(i)), 0.5 * sigma);
    std::vector<cplx> vals = inverse(g);
    if (std::isinf(r)) {
      double mx = 0.0;
      for (const auto& v : vals) mx = std::max(mx, std::abs(v));
      return mx;
    }
    const auto& w = grid_.flat_lifted_weights();
    double acc = 0.0;
    for (std::size_t k = 0; k < vals.size(); ++k)
      acc += w[k] * std::pow(std::abs(vals[k]), r);
    return std::pow(acc, 1.0 / r);
  }

  const Eigen::MatrixXd& vandermonde() const { return vand_; }

 private:
  void require_field(const SpectralField& f) const {
    if (f.dim() != dim() || f.max_level() != max_level_)
      throw std::invalid_argument("HermiteTransform: field shape mismatch");
  }

  void pack_box(const detail::CMat& c, SpectralField& out) const {
    const auto& modes = out.modes().modes();
    for (std::size_t i = 0; i < modes.size(); ++i)
      out[i] = c(modes[i][1], modes[i][0]);
  }
  detail::CMat unpack_box(const SpectralField& f) const {
    detail::CMat c = detail::CMat::Zero(max_level_ + 1, max_level_ + 1);
    const auto& modes = f.modes().modes();
    for (std::size_t i = 0; i < modes.size(); ++i) c(modes[i][1], modes[i][0]) = f[i];
    return c;
  }
  void pack_box3(const detail::CMat& c, SpectralField& out) const {
    const int L1 = max_level_ + 1;
    const auto& modes = out.modes().modes();
    for (std::size_t i = 0; i < modes.size(); ++i)
      out[i] = c(modes[i][2] + L1 * modes[i][1], modes[i][0]);
  }
  detail::CMat unpack_box3(const SpectralField& f) const {
    const int L1 = max_level_ + 1;
    detail::CMat c = detail::CMat::Zero(L1 * L1, L1);
    const auto& modes = f.modes().modes();
    for (std::size_t i = 0; i < modes.size(); ++i)
      c(modes[i][2] + L1 * modes[i][1], modes[i][0]) = f[i];
    return c;
  }

  QuadratureGrid grid_;
  int max_level_;
  Eigen::MatrixXd vand_;    // phi_m(x_k), (L+1) x n
  detail::CMat vand_c_;
  detail::CMat vandw_c_;    // phi_m(x_k) lifted_w_k
};

/// Exact Hermite-series evaluation at arbitrary points (no interpolation).
class PointEvaluator {
 public:
  PointEvaluator(int dim, int max_level, std::span<const std::array<double, 3>> points)
      : dim_(dim), max_level_(max_level), npts_(points.size()) {
    check_dim(dim);
    std::vector<double> col(static_cast<std::size_t>(max_level) + 1);
    for (int ax = 0; ax < dim; ++ax) {
      auto& tab = tab_[static_cast<std::size_t>(ax)];
      tab.resize(max_level + 1, static_cast<Eigen::Index>(npts_));
      for (std::size_t p = 0; p < npts_; ++p) {
        hermite_eval_range(max_level, points[p][static_cast<std::size_t>(ax)], col);
        for (int m = 0; m <= max_level; ++m)
          tab(m, static_cast<Eigen::Index>(p)) = col[static_cast<std::size_t>(m)];
      }
    }
  }

  std::size_t num_points() const { return npts_; }

  std::vector<cplx> evaluate(const SpectralField& f) const {
    if (f.dim() != dim_ || f.max_level() != max_level_)
      throw std::invalid_argument("PointEvaluator: field shape mismatch");
    const auto& modes = f.modes().modes();
    std::vector<cplx> out(npts_, cplx{0.0, 0.0});
    for (std::size_t p = 0; p < npts_; ++p) {
      const auto q = static_cast<Eigen::Index>(p);
      cplx acc = 0.0;
      for (std::size_t i = 0; i < modes.size(); ++i) {
        double phi = tab_[0](modes[i][0], q);
        for (int ax = 1; ax < dim_; ++ax)
          phi *= tab_[static_cast<std::size_t>(ax)](modes[i][ax], q);
        acc += f[i] * phi;
      }
      out[p] = acc;
    }
    return out;
  }

 private:
  int dim_;
  int max_level_;
  std::size_t npts_;
  std::array<Eigen::MatrixXd, 3> tab_;
};

}  // namespace hnls
