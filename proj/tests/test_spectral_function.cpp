#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "hnls/spectral_function.hpp"

using namespace hnls;

namespace {

// Independent oracle: brute-force sum over enumerated modes.
double diag_oracle(double lambda, std::array<double, 3> x, int d) {
  const int lmax = static_cast<int>(lambda);  // |l| <= lambda/2 anyway
  double s = 0.0;
  for (const auto& mi : enumerate_modes(lmax, d)) {
    if (eigenvalue(mi) > lambda) continue;
    double p = 1.0;
    for (int ax = 0; ax < d; ++ax) p *= hermite_eval(mi[ax], x[static_cast<std::size_t>(ax)]).value;
    s += p * p;
  }
  return s;
}

}  // namespace

TEST_CASE("empty sum below the bottom of the spectrum") {
  std::array<double, 3> x{0.3, -0.2, 0.0};
  CHECK(spectral_diag(1.9, std::span<const double>(x.data(), 2), 2) == 0.0);
}

TEST_CASE("origin values in d=2 pick up only even shells") {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  auto sp = std::span<const double>(x.data(), 2);
  // lambda=2: only l=(0,0): phi_0(0)^4 = 1/pi
  CHECK(spectral_diag(2.0, sp, 2) == Catch::Approx(1.0 / kPi).epsilon(1e-12));
  // lambda=4: shell |l|=1 vanishes at the origin by parity
  CHECK(spectral_diag(4.0, sp, 2) == Catch::Approx(1.0 / kPi).epsilon(1e-12));
}

TEST_CASE("agrees with the brute-force oracle at generic points") {
  for (int d = 1; d <= 3; ++d) {
    std::array<double, 3> x{0.7, -1.1, 0.4};
    auto sp = std::span<const double>(x.data(), static_cast<std::size_t>(d));
    for (double lam : {3.0, 8.0, 15.5})
      CHECK(spectral_diag(lam, sp, d) ==
            Catch::Approx(diag_oracle(lam, x, d)).margin(1e-12));
  }
}

TEST_CASE("monotone in lambda with jumps exactly at eigenvalues") {
  std::array<double, 3> x{0.4, 0.9, 0.0};
  auto sp = std::span<const double>(x.data(), 2);
  double prev = -1.0;
  for (double lam = 0.0; lam <= 20.0; lam += 0.5) {
    const double v = spectral_diag(lam, sp, 2);
    CHECK(v >= prev);
    prev = v;
  }
  // between consecutive eigenvalues the value is constant
  CHECK(spectral_diag(6.2, sp, 2) == spectral_diag(7.9, sp, 2));
  CHECK(spectral_diag(8.0, sp, 2) > spectral_diag(7.9, sp, 2));
}

TEST_CASE("trace identity: integral counts eigenvalues") {
  const int d = 2;
  QuadratureGrid grid(d, 64);
  for (double lam : {6.0, 12.0, 21.0}) {
    // quadrature of pi_H over R^d via shell functions
    double integral = 0.0;
    for (int m = 0; 2 * m + d <= lam; ++m) {
      auto q = shell_function_on_grid(m, grid);
      const auto& w = grid.flat_lifted_weights();
      for (std::size_t k = 0; k < q.size(); ++k) integral += w[k] * q[k];
    }
    std::int64_t count = 0;
    for (const auto& mi : enumerate_modes(static_cast<int>(lam), d))
      if (eigenvalue(mi) <= lam) ++count;
    CHECK(integral == Catch::Approx(static_cast<double>(count)).margin(1e-8));
  }
}

TEST_CASE("gaussian decay beyond the classical turning region") {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  const double lam = 12.0;
  double prev = -1.0;
  bool first = true;
  for (double rho = std::sqrt(2.0 * lam); rho < std::sqrt(2.0 * lam) + 3.0; rho += 0.5) {
    x[0] = rho;
    const double v = spectral_diag(lam, std::span<const double>(x.data(), 2), 2);
    if (!first) CHECK(v < prev);
    prev = v;
    first = false;
  }
}

TEST_CASE("zero shift gives zero increment") {
  QuadratureGrid grid(2, 48);
  auto inc = cluster_increment_norm(11.0, 0.0, 2.0, 2, grid);
  CHECK(inc.norm == 0.0);
}

TEST_CASE("increment norm exponent matches the cluster bound, d=2") {
  QuadratureGrid grid(2, 160);
  auto fit2 = increment_norm_fit(20.0, 200.0, 2.0, 2, grid);
  CHECK_FALSE(fit2.any_truncated);
  CHECK(fit2.fit.slope == Catch::Approx(0.5).margin(0.15));  // (d/2)(1+1/r)-1
  auto fitinf = increment_norm_fit(20.0, 200.0, std::numeric_limits<double>::infinity(), 2, grid);
  CHECK(fitinf.fit.slope == Catch::Approx(0.0).margin(0.2));  // d/2 - 1
}

TEST_CASE("mehler envelope fit recovers the Weyl growth") {
  std::vector<double> lambdas;
  for (double l = 20.0; l <= 200.0; l += 10.0) lambdas.push_back(l);
  std::vector<double> radii{0.0, 1.0, 2.0, 4.0, 6.0};
  auto fit = verify_mehler_bound(lambdas, radii, 2);
  CHECK(fit.origin_exponent == Catch::Approx(1.0).margin(0.1));
  CHECK(fit.violations == 0);
  CHECK(fit.decay_c > 0.0);
}

TEST_CASE("cluster difference bound") {
  std::array<double, 3> x{0.3, -0.4, 0.0};
  auto sp = std::span<const double>(x.data(), 2);
  CHECK(cluster_difference_bound(5, sp, sp, 2).sum == 0.0);

  // ratio bounded by one constant over sampled (j, x, y); sup of the cluster
  // sum itself bounded uniformly in j (d=2)
  double worst_ratio = 0.0;
  double worst_sup = 0.0;
  for (int j = 1; j <= 30; ++j) {
    for (double base : {0.0, 0.8, 2.5}) {
      for (double h : {0.05, 0.2, 0.5}) {
        std::array<double, 3> a{base, -0.3, 0.0};
        std::array<double, 3> b{base + h, -0.3 + 0.5 * h, 0.0};
        auto r = cluster_difference_bound(j, std::span<const double>(a.data(), 2),
                                          std::span<const double>(b.data(), 2), 2);
        worst_ratio = std::max(worst_ratio, r.ratio);
      }
      std::array<double, 3> p{base, 0.4, 0.0};
      auto t = detail::point_sq_tables(cluster_shell_level(j, 2), std::span<const double>(p.data(), 2), 2);
      worst_sup = std::max(worst_sup, detail::shell_value(cluster_shell_level(j, 2), t, 2));
    }
  }
  CHECK(worst_ratio < 2.0);  // empirical constant, recorded
  CHECK(worst_sup < 1.0);    // uniform-in-j bound
}
