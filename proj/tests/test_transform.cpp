#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "hnls/transform.hpp"

using namespace hnls;

namespace {

SpectralField random_field(int dim, int L, unsigned seed, double decay = 0.0) {
  SpectralField f(dim, L);
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double damp = std::exp(-decay * f.modes().mode(i).total());
    f[i] = cplx(g(rng), g(rng)) * damp;
  }
  return f;
}

}  // namespace

TEST_CASE("1D orthonormality of the discrete basis up to degree 100") {
  QuadratureGrid grid(1, 128);
  HermiteTransform ht(grid, 100);
  const auto& V = ht.vandermonde();
  double worst = 0.0;
  for (int m = 0; m <= 100; ++m)
    for (int n = m; n <= 100; ++n) {
      double ip = 0.0;
      for (int k = 0; k < grid.nodes_per_axis(); ++k)
        ip += grid.axis_lifted_weights()[static_cast<std::size_t>(k)] * V(m, k) * V(n, k);
      worst = std::max(worst, std::abs(ip - (m == n ? 1.0 : 0.0)));
    }
  CHECK(worst < 1e-10);
}

TEST_CASE("round trip is the identity on unit vectors") {
  for (int d = 1; d <= 3; ++d) {
    const int L = d == 3 ? 6 : 10;
    HermiteTransform ht(make_grid(d, L), L);
    for (std::size_t i : {std::size_t{0}, std::size_t{3}, ht.grid().num_nodes() % 7}) {
      if (i >= static_cast<std::size_t>(simplex_size(L, d))) continue;
      auto e = SpectralField::unit(d, L, i);
      auto back = ht.forward(ht.inverse(e));
      CHECK(l2_distance(back, e) < 1e-10);
    }
  }
}

TEST_CASE("forward of sampled phi_3 gives the unit vector") {
  const int L = 8;
  HermiteTransform ht(make_grid(1, L), L);
  std::vector<cplx> samples(ht.grid().num_nodes());
  for (std::size_t k = 0; k < samples.size(); ++k)
    samples[k] = hermite_eval(3, ht.grid().axis_nodes()[k]).value;
  auto f = ht.forward(samples);
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(std::abs(f[i] - (i == 3 ? cplx(1.0) : cplx(0.0))) < 1e-12);
}

TEST_CASE("random field round trip, d=2, L=12") {
  const int L = 12;
  HermiteTransform ht(make_grid(2, L), L);
  auto f = random_field(2, L, 7);
  auto back = ht.forward(ht.inverse(f));
  CHECK(l2_distance(back, f) / f.l2_norm() < 1e-10);
}

TEST_CASE("sobolev norm agrees with hand-computed two-mode sum") {
  // modes (1,0) lambda=4 weight 2, (0,2) lambda=6 weight -1+0.5i
  SpectralField f(2, 4);
  f[static_cast<std::size_t>(flat_index({{1, 0, 0}, 2}))] = 2.0;
  f[static_cast<std::size_t>(flat_index({{0, 2, 0}, 2}))] = cplx(-1.0, 0.5);
  const double s = 0.7;
  const double expect =
      std::sqrt(std::pow(4.0, s) * 4.0 + std::pow(6.0, s) * 1.25);
  CHECK(f.sobolev_norm(s) == Catch::Approx(expect).epsilon(1e-12));
  // s=0 is Parseval
  CHECK(f.sobolev_norm(0.0) == Catch::Approx(f.l2_norm()).epsilon(1e-14));
  // unit mass on (1,0), s=1 -> lambda^{1/2} = 2
  auto e = SpectralField::unit(2, 4, static_cast<std::size_t>(flat_index({{1, 0, 0}, 2})));
  CHECK(e.sobolev_norm(1.0) == Catch::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("wsp_norm at r=2 matches the sobolev norm") {
  const int L = 10;
  HermiteTransform ht(make_grid(2, L), L);
  auto f = random_field(2, L, 3);
  CHECK(ht.wsp_norm(f, 0.0, 2.0) == Catch::Approx(f.sobolev_norm(0.0)).epsilon(1e-10));
  CHECK(ht.wsp_norm(f, 1.3, 2.0) == Catch::Approx(f.sobolev_norm(1.3)).epsilon(1e-10));
}

TEST_CASE("wsp_norm at r=inf for the ground state is the peak value") {
  const int L = 4;
  // odd node count puts a node exactly at the maximum x=0
  QuadratureGrid grid(1, 21);
  HermiteTransform ht(grid, L);
  auto e = SpectralField::unit(1, L, 0);
  CHECK(ht.wsp_norm(e, 0.0, std::numeric_limits<double>::infinity()) ==
        Catch::Approx(std::pow(kPi, -0.25)).epsilon(1e-12));
}

TEST_CASE("linear propagation is unitary and composes additively") {
  const int L = 9;
  auto f = random_field(2, L, 11);
  for (double s : {0.0, 0.5, 2.0}) {
    CHECK(f.propagated(0.77).sobolev_norm(s) == Catch::Approx(f.sobolev_norm(s)).epsilon(1e-12));
  }
  auto a = f.propagated(0.3).propagated(0.45);
  auto b = f.propagated(0.75);
  CHECK(l2_distance(a, b) < 1e-12 * f.l2_norm());
  CHECK(l2_distance(f.propagated(0.0), f) == 0.0);
}

TEST_CASE("propagation by pi is a global phase, |values| unchanged") {
  const int L = 8;
  HermiteTransform ht(make_grid(2, L), L);
  auto f = random_field(2, L, 5, 0.3);
  auto g = f.propagated(kPi);
  // lambda = 2|l|+d  =>  e^{-i pi lambda} = e^{-i pi d}
  const cplx phase = std::polar(1.0, -kPi * 2.0);
  auto v0 = ht.inverse(f);
  auto v1 = ht.inverse(g);
  double worst = 0.0;
  for (std::size_t k = 0; k < v0.size(); ++k)
    worst = std::max(worst, std::abs(v1[k] - phase * v0[k]));
  CHECK(worst < 1e-10);
}

TEST_CASE("eigen-relation: multiplier lambda matches -Laplacian + |x|^2 to O(h^2)") {
  // 1D check on modes |l| <= 10 with centered finite differences
  const int L = 10;
  auto err_at = [&](double h) {
    double worst = 0.0;
    for (int n = 0; n <= L; ++n) {
      for (double x : {-1.1, 0.3, 1.7}) {
        const double lhs = (2.0 * n + 1.0) * hermite_eval(n, x).value;
        const double lap = (hermite_eval(n, x + h).value - 2.0 * hermite_eval(n, x).value +
                            hermite_eval(n, x - h).value) / (h * h);
        const double rhs = -lap + x * x * hermite_eval(n, x).value;
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
    return worst;
  };
  const double e1 = err_at(1e-2);
  const double e2 = err_at(5e-3);
  CHECK(e1 / e2 == Catch::Approx(4.0).margin(0.8));
}

TEST_CASE("insufficient grid raises a degree-budget error") {
  QuadratureGrid grid(1, 8);
  CHECK_THROWS_AS(HermiteTransform(grid, 10), GridError);
}

TEST_CASE("point evaluator agrees with grid synthesis") {
  const int L = 7;
  HermiteTransform ht(make_grid(2, L), L);
  auto f = random_field(2, L, 19);
  auto vals = ht.inverse(f);
  std::vector<std::array<double, 3>> pts;
  std::vector<std::size_t> flat;
  const int n = ht.grid().nodes_per_axis();
  for (std::size_t k : {std::size_t{0}, std::size_t{5}, static_cast<std::size_t>(n) * 3 + 2}) {
    pts.push_back(ht.grid().node(k));
    flat.push_back(k);
  }
  PointEvaluator pe(2, L, pts);
  auto pv = pe.evaluate(f);
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK(std::abs(pv[i] - vals[flat[i]]) < 1e-11);
}
