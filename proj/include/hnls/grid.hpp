#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "hnls/hermite.hpp"
#include "hnls/multi_index.hpp"

namespace hnls {

/// Tensorized Gauss-Hermite grid. The same 1D rule is used on every axis;
/// `lifted_weight` integrates functions that already carry the Gaussian,
/// i.e. sum_k lifted_w_k f(x_k) = int f for f = p(x) e^{-|x|^2}, deg p <=
/// 2n-1 per axis.
class QuadratureGrid {
 public:
  QuadratureGrid(int dim, int nodes_per_axis)
      : dim_(dim), rule_(gauss_hermite(nodes_per_axis)) {
    check_dim(dim);
    std::size_t total = 1;
    for (int i = 0; i < dim; ++i) total *= rule_.nodes.size();
    flat_lifted_.resize(total);
    const std::size_t n = rule_.nodes.size();
    for (std::size_t k = 0; k < total; ++k) {
      std::size_t rem = k;
      double w = 1.0;
      for (int ax = dim_ - 1; ax >= 0; --ax) {
        w *= rule_.lifted_weights[rem % n];
        rem /= n;
      }
      flat_lifted_[k] = w;
    }
  }

  int dim() const { return dim_; }
  int nodes_per_axis() const { return static_cast<int>(rule_.nodes.size()); }
  std::size_t num_nodes() const { return flat_lifted_.size(); }
  /// Exact for per-axis polynomial degree <= exactness_degree.
  int exactness_degree() const { return 2 * nodes_per_axis() - 1; }

  const std::vector<double>& axis_nodes() const { return rule_.nodes; }
  const std::vector<double>& axis_weights() const { return rule_.weights; }
  const std::vector<double>& axis_lifted_weights() const { return rule_.lifted_weights; }
  const std::vector<double>& flat_lifted_weights() const { return flat_lifted_; }

  /// Coordinates of flattened node k (row-major: axis 0 slowest).
  std::array<double, 3> node(std::size_t k) const {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    const std::size_t n = rule_.nodes.size();
    for (int ax = dim_ - 1; ax >= 0; --ax) {
      x[static_cast<std::size_t>(ax)] = rule_.nodes[k % n];
      k /= n;
    }
    return x;
  }

 private:
  int dim_;
  GaussHermiteRule rule_;
  std::vector<double> flat_lifted_;
};

/// Per-axis node count for resolving level cap L with nonlinear degree
/// growth factor p: n >= ceil((2 p L + 1)/2) + padding.
inline int nodes_for_level(int max_level, int degree_factor = 1, int padding = 8) {
  const int eff = degree_factor * max_level;
  return (2 * eff + 1 + 1) / 2 + padding;
}

inline QuadratureGrid make_grid(int dim, int max_level, int degree_factor = 1,
                                int padding = 8) {
  return QuadratureGrid(dim, nodes_for_level(max_level, degree_factor, padding));
}

}  // namespace hnls
