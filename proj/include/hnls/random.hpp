#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hnls/field.hpp"
#include "hnls/multi_index.hpp"

namespace hnls {

// ---------------------------------------------------------------------------
// Counter-based generator (Philox 4x32-10). A draw is a pure function of
// (seed, trial, index), so batches parallelize in any order and replay
// bit-identically.
// ---------------------------------------------------------------------------

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& ctr, std::array<std::uint32_t, 2>& key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  key[0] += 0x9E3779B9u;
  key[1] += 0xBB67AE85u;
}

inline std::array<std::uint32_t, 4> philox_block(std::uint64_t seed, std::uint64_t trial,
                                                 std::uint64_t index) {
  std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                      static_cast<std::uint32_t>(seed >> 32)};
  for (int r = 0; r < 10; ++r) philox_round(ctr, key);
  return ctr;
}

inline double to_unit_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t u = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;  // in (0,1)
}

}  // namespace detail

enum class RandomLaw { gaussian, rademacher, uniform };

inline RandomLaw parse_law(const std::string& s) {
  if (s == "gaussian") return RandomLaw::gaussian;
  if (s == "rademacher") return RandomLaw::rademacher;
  if (s == "uniform") return RandomLaw::uniform;
  throw std::invalid_argument("unknown law: " + s);
}

inline const char* law_name(RandomLaw law) {
  switch (law) {
    case RandomLaw::gaussian: return "gaussian";
    case RandomLaw::rademacher: return "rademacher";
    default: return "uniform";
  }
}

/// One unit-variance, mean-zero draw keyed by (seed, trial, index).
inline double draw(RandomLaw law, std::uint64_t seed, std::uint64_t trial, std::uint64_t index) {
  const auto b = detail::philox_block(seed, trial, index);
  switch (law) {
    case RandomLaw::gaussian: {
      const double u1 = detail::to_unit_open(b[0], b[1]);
      const double u2 = detail::to_unit_open(b[2], b[3]);
      return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }
    case RandomLaw::rademacher:
      return (b[0] & 1u) ? 1.0 : -1.0;
    default: {  // uniform on [-sqrt(3), sqrt(3)]
      const double u = detail::to_unit_open(b[0], b[1]);
      return (2.0 * u - 1.0) * std::sqrt(3.0);
    }
  }
}

// ---------------------------------------------------------------------------
// Coefficient profiles gamma and the randomized fields gamma^omega.
// ---------------------------------------------------------------------------

/// Deterministic coefficient sequence gamma with its regularity tag.
struct CoefficientProfile {
  SpectralField base;
  double regularity = 0.0;

  CoefficientProfile(SpectralField b, double s) : base(std::move(b)), regularity(s) {}
};

/// c_n = lambda_n^{-a} on every mode, then scaled.
inline CoefficientProfile power_profile(int dim, int max_level, double s, double a,
                                        double scale = 1.0) {
  SpectralField f(dim, max_level);
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = scale * std::pow(static_cast<double>(f.modes().lambda(i)), -a);
  return {std::move(f), s};
}

/// Equal moduli within each cluster; cluster j carries total mass j^{-2b},
/// i.e. c_n = j^{-b} / sqrt(#I(j)) for n in I(j).
inline CoefficientProfile cluster_flat_profile(int dim, int max_level, double s, double b,
                                               double scale = 1.0) {
  SpectralField f(dim, max_level);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const int m = f.modes().mode(i).total();
    const int j = shell_cluster_label(m, dim);
    const double nj = static_cast<double>(shell_size(m, dim));
    f[i] = scale * std::pow(static_cast<double>(j), -b) / std::sqrt(nj);
  }
  return {std::move(f), s};
}

/// Smallest admissible squeezing constant: the max over clusters of
/// max |c_k|^2 #I(j) / sum |c_n|^2. All-zero clusters contribute 1.
inline double squeezing_constant(const CoefficientProfile& profile) {
  const auto& f = profile.base;
  double worst = 1.0;
  for (int m = 0; m <= f.max_level(); ++m) {
    auto [b, e] = f.modes().shell_range(m);
    double maxsq = 0.0, sumsq = 0.0;
    for (std::size_t i = b; i < e; ++i) {
      const double a2 = std::norm(f[i]);
      maxsq = std::max(maxsq, a2);
      sumsq += a2;
    }
    if (sumsq > 0.0)
      worst = std::max(worst, maxsq * static_cast<double>(e - b) / sumsq);
  }
  return worst;
}

/// gamma^omega = sum c_n g_n(omega) phi_n with real i.i.d. g_n keyed by the
/// graded-lex index.
inline SpectralField sample(const CoefficientProfile& profile, RandomLaw law,
                            std::uint64_t seed, std::uint64_t trial) {
  SpectralField f = profile.base;
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= draw(law, seed, trial, i);
  return f;
}

/// Reproducible batch of randomized fields.
struct SampleBatch {
  const CoefficientProfile* profile;
  RandomLaw law;
  std::uint64_t seed;
  std::uint64_t trials;

  SpectralField field(std::uint64_t trial) const { return sample(*profile, law, seed, trial); }
};

struct MgfCurve {
  std::vector<double> t;
  std::vector<double> emp;     // Monte-Carlo E e^{t g}
  double fitted_c = 0.0;       // least-squares slope of log E vs t^2
  double envelope_c = 0.0;     // max log E / t^2 (curve sits under e^{c t^2})
};

/// Empirical exponential-moment curve of a law.
inline MgfCurve mgf_check(RandomLaw law, std::vector<double> ts, int trials,
                          std::uint64_t seed) {
  MgfCurve out;
  out.t = std::move(ts);
  out.emp.resize(out.t.size());
  double num = 0.0, den = 0.0, env = 0.0;
  for (std::size_t j = 0; j < out.t.size(); ++j) {
    if (std::abs(out.t[j]) > 5.0)
      throw std::invalid_argument("mgf_check: |t| must be <= 5");
    double acc = 0.0;
    for (int i = 0; i < trials; ++i)
      acc += std::exp(out.t[j] * draw(law, seed, static_cast<std::uint64_t>(i), 0));
    out.emp[j] = acc / trials;
    const double t2 = out.t[j] * out.t[j];
    if (t2 > 0.0) {
      num += t2 * std::log(out.emp[j]);
      den += t2 * t2;
      env = std::max(env, std::log(out.emp[j]) / t2);
    }
  }
  out.fitted_c = den > 0 ? num / den : 0.0;
  out.envelope_c = env;
  return out;
}

}  // namespace hnls
