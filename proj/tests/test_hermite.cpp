#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hnls/hermite.hpp"

using namespace hnls;

namespace {

// Oracle: phi_n via explicit Hermite polynomials H_0..H_4 with the
// normalization (2^n n! sqrt(pi))^{-1/2} and Gaussian factor.
double phi_explicit(int n, double x) {
  double h = 0.0;
  switch (n) {
    case 0: h = 1.0; break;
    case 1: h = 2.0 * x; break;
    case 2: h = 4.0 * x * x - 2.0; break;
    case 3: h = 8.0 * x * x * x - 12.0 * x; break;
    case 4: h = 16.0 * std::pow(x, 4) - 48.0 * x * x + 12.0; break;
    default: REQUIRE(false);
  }
  double fact = 1.0;
  for (int i = 1; i <= n; ++i) fact *= i;
  return h * std::exp(-0.5 * x * x) / std::sqrt(std::pow(2.0, n) * fact * kSqrtPi);
}

}  // namespace

TEST_CASE("phi_0 at the origin") {
  CHECK(hermite_eval(0, 0.0).value == Catch::Approx(std::pow(kPi, -0.25)).epsilon(1e-12));
}

TEST_CASE("odd parity vanishes at 0") {
  CHECK(hermite_eval(1, 0.0).value == 0.0);
  CHECK(hermite_eval(7, 0.0).value == 0.0);
}

TEST_CASE("phi_2 at 0 against the explicit polynomial") {
  const double expect = phi_explicit(2, 0.0);
  CHECK(expect == Catch::Approx(-std::pow(kPi, -0.25) / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(hermite_eval(2, 0.0).value == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("low degrees match explicit polynomials off the origin") {
  for (int n = 0; n <= 4; ++n)
    for (double x : {-2.3, -0.7, 0.4, 1.9, 3.5})
      CHECK(hermite_eval(n, x).value == Catch::Approx(phi_explicit(n, x)).margin(1e-13));
}

TEST_CASE("range evaluation agrees with single evaluation") {
  std::vector<double> vals(201);
  hermite_eval_range(200, 1.37, vals);
  for (int n : {0, 1, 17, 100, 200})
    CHECK(vals[static_cast<std::size_t>(n)] ==
          Catch::Approx(hermite_eval(n, 1.37).value).margin(1e-14));
}

TEST_CASE("underflow far outside the classical region returns 0 with flag") {
  auto v = hermite_eval(0, 60.0);  // exp(-1800)
  CHECK(v.value == 0.0);
  CHECK(v.underflowed);
  // but degree large enough to re-enter the oscillatory region recovers
  auto w = hermite_eval(2000, 60.0);  // turning point sqrt(2*2000+1) ~ 63
  CHECK(std::abs(w.value) > 1e-30);
  CHECK_FALSE(w.underflowed);
}

TEST_CASE("no overflow at high degree near the turning point") {
  std::vector<double> vals(3001);
  bool uf = false;
  hermite_eval_range(3000, 25.0, vals, &uf);
  for (double v : vals) CHECK(std::isfinite(v));
  CHECK(std::abs(vals[3000]) < 1.0);
}

TEST_CASE("gauss_hermite N=1 is the midpoint rule") {
  auto r = gauss_hermite(1);
  REQUIRE(r.nodes.size() == 1);
  CHECK(r.nodes[0] == 0.0);
  CHECK(r.weights[0] == Catch::Approx(kSqrtPi).epsilon(1e-14));
}

TEST_CASE("gauss_hermite N=2 hits the roots of H_2") {
  auto r = gauss_hermite(2);
  REQUIRE(r.nodes.size() == 2);
  CHECK(r.nodes[0] == Catch::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-13));
  CHECK(r.nodes[1] == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));
  CHECK(r.weights[0] == Catch::Approx(0.5 * kSqrtPi).epsilon(1e-13));
  CHECK(r.weights[1] == Catch::Approx(0.5 * kSqrtPi).epsilon(1e-13));
}

TEST_CASE("weights sum to sqrt(pi) and nodes are symmetric") {
  for (int n : {3, 7, 16, 41, 80, 141}) {
    auto r = gauss_hermite(n);
    double s = 0.0;
    for (double w : r.weights) s += w;
    CHECK(s == Catch::Approx(kSqrtPi).margin(1e-12));
    for (int k = 0; k < n; ++k)
      CHECK(r.nodes[static_cast<std::size_t>(k)] ==
            -r.nodes[static_cast<std::size_t>(n - 1 - k)]);
  }
}

TEST_CASE("rule integrates even moments exactly") {
  // int x^{2m} e^{-x^2} dx = (2m-1)!! sqrt(pi) / 2^m
  auto r = gauss_hermite(8);
  double dfact = 1.0;
  for (int m = 0; m <= 7; ++m) {
    if (m > 0) dfact *= 2 * m - 1;
    double q = 0.0;
    for (std::size_t k = 0; k < r.nodes.size(); ++k)
      q += r.weights[k] * std::pow(r.nodes[k], 2 * m);
    CHECK(q == Catch::Approx(dfact * kSqrtPi / std::pow(2.0, m)).epsilon(1e-12));
  }
}

TEST_CASE("lifted weights match w e^{x^2} where both are representable") {
  auto r = gauss_hermite(31);
  for (std::size_t k = 0; k < r.nodes.size(); ++k)
    CHECK(r.lifted_weights[k] ==
          Catch::Approx(r.weights[k] * std::exp(r.nodes[k] * r.nodes[k])).epsilon(1e-11));
}

TEST_CASE("lifted weights stay finite for very large rules") {
  auto r = gauss_hermite(500);
  for (double w : r.lifted_weights) {
    CHECK(std::isfinite(w));
    CHECK(w > 0.0);
  }
}
