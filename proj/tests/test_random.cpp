#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hnls/random.hpp"
#include "hnls/stats.hpp"

using namespace hnls;

TEST_CASE("draws are deterministic in (seed, trial, index)") {
  for (auto law : {RandomLaw::gaussian, RandomLaw::rademacher, RandomLaw::uniform})
    CHECK(draw(law, 42, 7, 13) == draw(law, 42, 7, 13));
  // continuous laws: distinct keys give distinct values
  for (auto law : {RandomLaw::gaussian, RandomLaw::uniform}) {
    CHECK(draw(law, 42, 7, 13) != draw(law, 42, 7, 14));
    CHECK(draw(law, 42, 7, 13) != draw(law, 43, 7, 13));
    CHECK(draw(law, 42, 7, 13) != draw(law, 42, 8, 13));
  }
}

TEST_CASE("sampled field is reproducible and rademacher preserves moduli") {
  auto gamma = cluster_flat_profile(2, 8, 0.0, 0.5);
  auto a = sample(gamma, RandomLaw::rademacher, 9, 3);
  auto b = sample(gamma, RandomLaw::rademacher, 9, 3);
  CHECK(l2_distance(a, b) == 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(std::abs(a[i]) == Catch::Approx(std::abs(gamma.base[i])).margin(1e-15));
}

TEST_CASE("laws are mean zero, unit variance") {
  const int n = 200000;
  for (auto law : {RandomLaw::gaussian, RandomLaw::rademacher, RandomLaw::uniform}) {
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = draw(law, 5, static_cast<std::uint64_t>(i), 0);
      s += g;
      s2 += g * g;
    }
    CHECK(s / n == Catch::Approx(0.0).margin(0.01));
    CHECK(s2 / n == Catch::Approx(1.0).margin(0.02));
  }
}

TEST_CASE("gaussian coordinate law passes a KS test at the 1% level") {
  const int n = 100000;
  std::vector<double> samples(n);
  for (int i = 0; i < n; ++i) samples[static_cast<std::size_t>(i)] = draw(RandomLaw::gaussian, 11, static_cast<std::uint64_t>(i), 42);
  const double d = ks_statistic_gaussian(samples);
  CHECK(d < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("squeezing constant examples") {
  // equal moduli in every cluster -> 1
  auto flat = cluster_flat_profile(2, 10, 0.0, 1.0);
  CHECK(squeezing_constant(flat) == Catch::Approx(1.0).margin(1e-14));

  // d=2 cluster j=2 (shell |l|=1, two members) with coefficients (1, 0) -> C=2
  SpectralField f(2, 3);
  f[static_cast<std::size_t>(flat_index({{1, 0, 0}, 2}))] = 1.0;
  CHECK(squeezing_constant({f, 0.0}) == Catch::Approx(2.0).margin(1e-14));

  // one populated cluster with 3 equal entries, rest zero -> 1
  SpectralField g(2, 4);
  for (const auto& mi : cluster_members(3, 2))
    g[static_cast<std::size_t>(flat_index(mi))] = cplx(0.0, 0.7);
  CHECK(squeezing_constant({g, 0.0}) == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("squeezing constant is scale and flow invariant") {
  auto gamma = power_profile(2, 9, 0.0, 0.8);
  const double c0 = squeezing_constant(gamma);
  auto scaled = gamma.base;
  scaled *= cplx(0.0, -3.7);
  CHECK(squeezing_constant({scaled, 0.0}) == Catch::Approx(c0).margin(1e-12));
  CHECK(squeezing_constant({gamma.base.propagated(1.234), 0.0}) ==
        Catch::Approx(c0).margin(1e-12));
}

TEST_CASE("expected squared sobolev norm of samples matches the profile") {
  auto gamma = cluster_flat_profile(2, 8, 0.5, 0.7);
  const double target = gamma.base.sobolev_norm(0.5);
  const int trials = 10000;
  std::vector<double> vals(trials);
  for (int i = 0; i < trials; ++i) {
    auto u = sample(gamma, RandomLaw::gaussian, 21, static_cast<std::uint64_t>(i));
    const double v = u.sobolev_norm(0.5);
    vals[static_cast<std::size_t>(i)] = v * v;
  }
  const double m = mean(vals);
  const double se = std::sqrt(variance(vals) / trials);
  CHECK(std::abs(m - target * target) < 3.0 * se);
}

TEST_CASE("mgf curves") {
  std::vector<double> ts{-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0};
  auto g = mgf_check(RandomLaw::gaussian, ts, 200000, 3);
  CHECK(g.fitted_c == Catch::Approx(0.5).margin(0.05));
  // t = 0 -> exactly 1
  CHECK(g.emp[3] == 1.0);
  // rademacher: cosh(t) <= e^{t^2/2}
  auto r = mgf_check(RandomLaw::rademacher, ts, 50000, 4);
  for (std::size_t j = 0; j < ts.size(); ++j) {
    CHECK(r.emp[j] == Catch::Approx(std::cosh(ts[j])).epsilon(0.02));
    CHECK(r.emp[j] <= std::exp(0.5 * ts[j] * ts[j]) * 1.001);
  }
  CHECK(r.envelope_c <= 0.5 + 0.02);
}
