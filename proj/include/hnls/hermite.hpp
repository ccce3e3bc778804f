#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "hnls/common.hpp"

namespace hnls {

struct HermiteValue {
  double value = 0.0;
  bool underflowed = false;  // true magnitude below DBL_MIN, returned as 0
};

namespace detail {

// Recurrence state (f_prev, f_cur) scaled by 2^e2. Rescaling keeps the
// mantissas inside [2^-512, 2^512] so the three-term recurrence
//   phi_{n+1} = x sqrt(2/(n+1)) phi_n - sqrt(n/(n+1)) phi_{n-1}
// never overflows, no matter how far x sits beyond the turning point.
struct ScaledPair {
  double f_prev = 0.0;
  double f_cur = 0.0;
  long e2 = 0;

  void renormalize() {
    const double a = std::max(std::abs(f_prev), std::abs(f_cur));
    if (a == 0.0) return;
    if (a > 0x1p512) {
      f_prev *= 0x1p-512;
      f_cur *= 0x1p-512;
      e2 += 512;
    } else if (a < 0x1p-512) {
      f_prev *= 0x1p512;
      f_cur *= 0x1p512;
      e2 -= 512;
    }
  }

  double materialize(bool* underflow = nullptr) const {
    if (f_cur == 0.0) return 0.0;
    if (e2 < -2200) {  // far below DBL_MIN even before ldexp
      if (underflow) *underflow = true;
      return 0.0;
    }
    const double v = std::ldexp(f_cur, static_cast<int>(e2));
    if (v == 0.0 && underflow) *underflow = true;
    return v;
  }
};

// Seed phi_0(x) = pi^{-1/4} exp(-x^2/2) in scaled form.
inline ScaledPair hermite_seed(double x) {
  constexpr double kLog2e = 1.4426950408889634074;
  constexpr double kLog2Pi = 1.6514961294723187980;
  const double log2_phi0 = -0.5 * x * x * kLog2e - 0.25 * kLog2Pi;
  ScaledPair st;
  st.e2 = static_cast<long>(std::floor(log2_phi0));
  st.f_cur = std::exp2(log2_phi0 - static_cast<double>(st.e2));
  st.f_prev = 0.0;
  return st;
}

inline void hermite_advance(ScaledPair& st, int n, double x) {
  // from (phi_{n-1}, phi_n) to (phi_n, phi_{n+1})
  const double next = x * std::sqrt(2.0 / (n + 1)) * st.f_cur -
                      std::sqrt(static_cast<double>(n) / (n + 1)) * st.f_prev;
  st.f_prev = st.f_cur;
  st.f_cur = next;
  st.renormalize();
}

}  // namespace detail

/// L^2-normalized Hermite function phi_n(x), Gaussian factor included.
inline HermiteValue hermite_eval(int n, double x) {
  if (n < 0) throw std::invalid_argument("hermite_eval: degree must be >= 0");
  if (!std::isfinite(x)) throw std::invalid_argument("hermite_eval: x not finite");
  detail::ScaledPair st = detail::hermite_seed(x);
  for (int k = 0; k < n; ++k) detail::hermite_advance(st, k, x);
  HermiteValue out;
  out.value = st.materialize(&out.underflowed);
  return out;
}

/// phi_0(x)..phi_{nmax}(x) in one sweep; underflowed entries come out as 0.
inline void hermite_eval_range(int nmax, double x, std::span<double> out,
                               bool* underflowed = nullptr) {
  if (nmax < 0 || out.size() < static_cast<std::size_t>(nmax) + 1)
    throw std::invalid_argument("hermite_eval_range: bad span");
  detail::ScaledPair st = detail::hermite_seed(x);
  bool uf = false;
  out[0] = st.materialize(&uf);
  for (int k = 0; k < nmax; ++k) {
    detail::hermite_advance(st, k, x);
    out[static_cast<std::size_t>(k) + 1] = st.materialize(&uf);
  }
  if (underflowed) *underflowed = uf;
}

/// d/dx phi_n = sqrt(2n) phi_{n-1} - x phi_n.
inline double hermite_derivative(int n, double x) {
  const double cur = hermite_eval(n, x).value;
  const double below = n > 0 ? hermite_eval(n - 1, x).value : 0.0;
  return std::sqrt(2.0 * n) * below - x * cur;
}

/// Gauss-Hermite rule for weight e^{-x^2}: exact for polynomials of degree
/// <= 2n-1. `lifted_weights` are w_k e^{x_k^2}, formed through the
/// Christoffel identity 1/sum_j phi_j(x_k)^2 so they stay finite for any n,
/// while `weights` themselves underflow past |x_k| ~ 26.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> lifted_weights;
};

inline GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: need n >= 1");
  GaussHermiteRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  if (n == 1) {
    rule.nodes[0] = 0.0;
  } else {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(0.5 * k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("gauss_hermite: tridiagonal eigensolve failed");
    for (int k = 0; k < n; ++k) rule.nodes[static_cast<std::size_t>(k)] = es.eigenvalues()[k];
    std::sort(rule.nodes.begin(), rule.nodes.end());
  }

  // Two Newton steps on phi_n(x) = 0, then exact symmetrization about 0.
  std::vector<double> tab(static_cast<std::size_t>(n) + 1);
  for (auto& x : rule.nodes) {
    for (int it = 0; it < 2; ++it) {
      hermite_eval_range(n, x, tab);
      const double fp = std::sqrt(2.0 * n) * tab[static_cast<std::size_t>(n) - 1] -
                        x * tab[static_cast<std::size_t>(n)];
      if (fp == 0.0) break;
      x -= tab[static_cast<std::size_t>(n)] / fp;
    }
  }
  for (int k = 0; k < n / 2; ++k) {
    const std::size_t a = static_cast<std::size_t>(k);
    const std::size_t b = static_cast<std::size_t>(n - 1 - k);
    const double v = 0.5 * (rule.nodes[b] - rule.nodes[a]);
    rule.nodes[a] = -v;
    rule.nodes[b] = v;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;

  rule.weights.resize(static_cast<std::size_t>(n));
  rule.lifted_weights.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double x = rule.nodes[static_cast<std::size_t>(k)];
    hermite_eval_range(n - 1, x, std::span<double>(tab.data(), static_cast<std::size_t>(n)));
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += tab[static_cast<std::size_t>(j)] * tab[static_cast<std::size_t>(j)];
    rule.lifted_weights[static_cast<std::size_t>(k)] = 1.0 / s;
    rule.weights[static_cast<std::size_t>(k)] = std::exp(-x * x) / s;
  }
  return rule;
}

}  // namespace hnls
