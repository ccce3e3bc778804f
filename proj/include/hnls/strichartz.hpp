#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "hnls/random.hpp"
#include "hnls/stats.hpp"
#include "hnls/transform.hpp"

namespace hnls {

// ---------------------------------------------------------------------------
// Mixed space-time norms of the linear flow.
// ---------------------------------------------------------------------------

/// L^q_{[0,T]} W^{s+alpha,r} specification. The regularity gain alpha
/// defaults to d(1/2 - 1/r) for r < inf and must stay below d/2 at r = inf.
struct MixedNormSpec {
  double q = 4.0;
  double r = 4.0;
  double s = 0.0;
  double alpha = 0.0;
  double T = 1.0;
  double tau = 0.0;
  int time_samples = 32;

  static MixedNormSpec make(int dim, double q, double r, double s, double T,
                            double tau = 0.0, int time_samples = 32,
                            std::optional<double> alpha = std::nullopt) {
    MixedNormSpec spec;
    spec.q = q;
    spec.r = r;
    spec.s = s;
    spec.T = T;
    spec.tau = tau;
    spec.time_samples = time_samples;
    if (q < 1.0 || std::isinf(q)) throw std::invalid_argument("MixedNormSpec: need 1 <= q < inf");
    if (r < 2.0) throw std::invalid_argument("MixedNormSpec: need r >= 2");
    if (T <= 0.0) throw std::invalid_argument("MixedNormSpec: need T > 0");
    if (alpha) {
      spec.alpha = *alpha;
      if (std::isinf(r) && spec.alpha >= 0.5 * dim)
        throw std::invalid_argument("MixedNormSpec: alpha must be < d/2 at r = inf");
    } else {
      spec.alpha = std::isinf(r) ? 0.5 * dim - 0.1 : dim * (0.5 - 1.0 / r);
    }
    return spec;
  }
};

/// Midpoint-rule discretization of || e^{-i(t+tau)H} u ||_{L^q_T W^{s+a,r}}.
inline double mixed_norm(const SpectralField& u, const MixedNormSpec& spec,
                         const HermiteTransform& ht) {
  if (spec.time_samples < 16)
    throw std::invalid_argument("mixed_norm: need >= 16 time samples");
  const double dt = spec.T / spec.time_samples;
  double acc = 0.0;
  for (int i = 0; i < spec.time_samples; ++i) {
    const double t = (i + 0.5) * dt + spec.tau;
    const double v = ht.wsp_norm(u.propagated(t), spec.s + spec.alpha, spec.r);
    acc += dt * std::pow(v, spec.q);
  }
  return std::pow(acc, 1.0 / spec.q);
}

// ---------------------------------------------------------------------------
// Khinchin moments.
// ---------------------------------------------------------------------------

/// Empirical (E |sum g_n c_n|^k)^{1/k} / (sqrt(k) ||c||_2).
inline double khinchin_ratio(std::span<const cplx> c, double k, RandomLaw law,
                             int trials, std::uint64_t seed) {
  if (k < 2.0) throw std::invalid_argument("khinchin_ratio: need k >= 2");
  double c2 = 0.0;
  for (const auto& z : c) c2 += std::norm(z);
  if (c2 == 0.0) throw std::invalid_argument("khinchin_ratio: zero coefficients");
  double acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    cplx s = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n)
      s += c[n] * draw(law, seed, static_cast<std::uint64_t>(t), n);
    acc += std::pow(std::abs(s), k);
  }
  acc /= trials;
  return std::pow(acc, 1.0 / k) / (std::sqrt(k) * std::sqrt(c2));
}

// ---------------------------------------------------------------------------
// Tail curves.
// ---------------------------------------------------------------------------

struct TailCurve {
  std::vector<double> K;
  std::vector<long> exceed;
  std::vector<double> p, ci_lo, ci_hi;
  int trials = 0;
  LinearFit slope_fit;        // log p against K^2 inside the window
  bool fit_ok = false;
  double window_lo = 0.0, window_hi = 0.0;

  void finalize(std::uint64_t) {
    p.resize(K.size());
    ci_lo.resize(K.size());
    ci_hi.resize(K.size());
    std::vector<double> fx, fy, fw;
    for (std::size_t j = 0; j < K.size(); ++j) {
      p[j] = static_cast<double>(exceed[j]) / trials;
      const auto ci = wilson_interval(exceed[j], trials);
      ci_lo[j] = ci.lo;
      ci_hi[j] = ci.hi;
      // sub-Gaussian regime: keep points with enough tail counts and p < 1/2
      if (p[j] > 10.0 / trials && p[j] < 0.5) {
        fx.push_back(K[j] * K[j]);
        fy.push_back(std::log(p[j]));
        fw.push_back(trials * p[j] / (1.0 - p[j]));  // inverse variance of log p
        if (fx.size() == 1) window_lo = K[j];
        window_hi = K[j];
      }
    }
    if (fx.size() >= 3) {
      slope_fit = weighted_linear_fit(fx, fy, fw);
      fit_ok = true;
    }
  }
};

/// Exceedance statistics of a per-trial functional. `statistic(trial)` must
/// be a pure function of (seed, trial).
template <typename Statistic>
TailCurve tail_curve_from(Statistic&& statistic, std::span<const double> Ks, int trials,
                          std::uint64_t seed, int threads) {
  if (trials < 1) throw std::invalid_argument("tail_curve: need trials >= 1");
  std::vector<double> values(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), threads,
               [&](std::size_t t) { values[t] = statistic(static_cast<std::uint64_t>(t)); });
  TailCurve out;
  out.trials = trials;
  if (Ks.empty()) {
    // quantile-spanned grid: from the lower quartile to the 1 - 20/trials tail
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted[sorted.size() / 4];
    const std::size_t hi_rank =
        sorted.size() - 1 - std::min<std::size_t>(sorted.size() - 1, 20);
    const double hi = sorted[hi_rank];
    const int npts = 25;
    for (int j = 0; j < npts; ++j)
      out.K.push_back(lo + (hi - lo) * j / (npts - 1.0));
  } else {
    out.K.assign(Ks.begin(), Ks.end());
  }
  out.exceed.assign(out.K.size(), 0);
  for (double v : values)
    for (std::size_t j = 0; j < out.K.size(); ++j)
      if (v > out.K[j]) ++out.exceed[j];
  out.finalize(seed);
  return out;
}

/// Tail of the randomized linear-flow mixed norm over the profile's law.
inline TailCurve tail_curve(const CoefficientProfile& gamma, RandomLaw law,
                            const MixedNormSpec& spec, std::span<const double> Ks,
                            int trials, std::uint64_t seed, const HermiteTransform& ht,
                            int threads = 1) {
  if (trials < 1000) throw std::invalid_argument("tail_curve: need >= 1e3 trials");
  return tail_curve_from(
      [&](std::uint64_t t) { return mixed_norm(sample(gamma, law, seed, t), spec, ht); },
      Ks, trials, seed, threads);
}

struct ShiftComparison {
  std::vector<double> taus;
  std::vector<TailCurve> curves;
  int disjoint_bands = 0;  // K points whose 95% intervals fail to overlap
};

/// Tail curves across time shifts, with a per-K overlap test against tau_0.
/// Each shift consumes an independent trial stream.
inline ShiftComparison shift_invariance_check(const CoefficientProfile& gamma, RandomLaw law,
                                              MixedNormSpec spec, std::span<const double> taus,
                                              int trials, std::uint64_t seed,
                                              const HermiteTransform& ht, int threads = 1) {
  if (taus.size() < 2) throw std::invalid_argument("shift_invariance_check: need >= 2 shifts");
  ShiftComparison out;
  out.taus.assign(taus.begin(), taus.end());
  // common K grid from the first shift
  spec.tau = taus[0];
  out.curves.push_back(tail_curve(gamma, law, spec, {}, trials, seed, ht, threads));
  const auto& K0 = out.curves[0].K;
  for (std::size_t i = 1; i < taus.size(); ++i) {
    spec.tau = taus[i];
    out.curves.push_back(tail_curve_from(
        [&, tau = taus[i]](std::uint64_t t) {
          MixedNormSpec s2 = spec;
          s2.tau = tau;
          return mixed_norm(sample(gamma, law, seed, t + (i << 32)), s2, ht);
        },
        K0, trials, seed, threads));
    for (std::size_t j = 0; j < K0.size(); ++j)
      if (out.curves[i].ci_lo[j] > out.curves[0].ci_hi[j] ||
          out.curves[i].ci_hi[j] < out.curves[0].ci_lo[j])
        ++out.disjoint_bands;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Event sets for the fixed-point arguments.
// ---------------------------------------------------------------------------

/// Deterministic pair set for Holder quotients: centers in |x| <= r0 with
/// offsets |x - y| <= 1 across dyadic magnitudes.
inline std::vector<std::array<double, 3>> holder_pair_points(int dim, int pairs,
                                                             std::uint64_t seed,
                                                             double r0 = 3.0) {
  std::vector<std::array<double, 3>> pts;
  pts.reserve(2 * static_cast<std::size_t>(pairs));
  const double mags[6] = {0.02, 0.05, 0.12, 0.3, 0.6, 1.0};
  for (int p = 0; p < pairs; ++p) {
    std::array<double, 3> x{0, 0, 0}, y{0, 0, 0};
    double dir2 = 0.0;
    std::array<double, 3> dir{0, 0, 0};
    for (int ax = 0; ax < dim; ++ax) {
      x[static_cast<std::size_t>(ax)] =
          r0 * draw(RandomLaw::uniform, seed ^ 0x484f4c44u, 0, static_cast<std::uint64_t>(p * 8 + ax)) / std::sqrt(3.0);
      dir[static_cast<std::size_t>(ax)] =
          draw(RandomLaw::gaussian, seed ^ 0x484f4c44u, 1, static_cast<std::uint64_t>(p * 8 + ax));
      dir2 += dir[static_cast<std::size_t>(ax)] * dir[static_cast<std::size_t>(ax)];
    }
    const double h = mags[p % 6] / std::sqrt(dir2);
    for (int ax = 0; ax < dim; ++ax)
      y[static_cast<std::size_t>(ax)] = x[static_cast<std::size_t>(ax)] + h * dir[static_cast<std::size_t>(ax)];
    pts.push_back(x);
    pts.push_back(y);
  }
  return pts;
}

/// sup over sampled (t, x, y) of |f(t,x) - f(t,y)| / |x-y|^{1-eps} for
/// f = e^{-itH} u, over t in [0, 2pi].
inline double holder_quotient(const SpectralField& u, double eps,
                              const PointEvaluator& pe,
                              std::span<const std::array<double, 3>> pts,
                              int time_samples) {
  double worst = 0.0;
  for (int i = 0; i < time_samples; ++i) {
    const double t = (i + 0.5) * 2.0 * kPi / time_samples;
    auto vals = pe.evaluate(u.propagated(t));
    for (std::size_t p = 0; p + 1 < vals.size(); p += 2) {
      double d2 = 0.0;
      for (int ax = 0; ax < u.dim(); ++ax) {
        const double dx = pts[p][static_cast<std::size_t>(ax)] - pts[p + 1][static_cast<std::size_t>(ax)];
        d2 += dx * dx;
      }
      const double dist = std::sqrt(d2);
      if (dist == 0.0) continue;
      worst = std::max(worst, std::abs(vals[p] - vals[p + 1]) / std::pow(dist, 1.0 - eps));
    }
  }
  return worst;
}

struct EventSetSpec {
  enum class Kind { gd, f_sigma, f0_holder } kind = Kind::gd;
  double K = 1.0;
  double eps = 0.1;     // integrability exponent 1/eps and regularity shaving
  double sigma = 0.0;   // regularity tag of the f_sigma set
  int time_samples = 32;
  int pairs = 48;       // Holder constraint sampling (f0_holder only)
};

struct Membership {
  struct Constraint {
    std::string name;
    double achieved;
    double margin;  // K - achieved
  };
  bool member = true;
  std::vector<Constraint> constraints;
};

/// Evaluates each defining norm of the set and reports per-constraint
/// margins. Positive margins everywhere means membership.
inline Membership event_membership(const SpectralField& u, const EventSetSpec& set,
                                   const HermiteTransform& ht, std::uint64_t pair_seed = 1234) {
  if (!(set.eps > 0.0 && set.eps <= 0.25))
    throw std::invalid_argument("event_membership: eps in (0, 1/4]");
  const int d = u.dim();
  Membership out;
  auto push = [&](std::string name, double achieved) {
    out.constraints.push_back({std::move(name), achieved, set.K - achieved});
    out.member = out.member && achieved <= set.K;
  };
  const double inf = std::numeric_limits<double>::infinity();
  switch (set.kind) {
    case EventSetSpec::Kind::gd: {
      push("l2", u.l2_norm());
      auto spec = MixedNormSpec::make(d, 1.0 / set.eps, inf, 0.0, 4.0 * kPi, -2.0 * kPi,
                                      set.time_samples, 0.5 * d - set.eps);
      push("flow_w_{d/2-eps},inf", mixed_norm(u, spec, ht));
      break;
    }
    case EventSetSpec::Kind::f_sigma: {
      push("h_sigma", u.sobolev_norm(set.sigma));
      auto spec = MixedNormSpec::make(d, 1.0 / set.eps, inf, 0.0, 2.0 * kPi, 0.0,
                                      set.time_samples, 1.0 + set.sigma - set.eps);
      push("flow_w_{1+sigma-eps},inf", mixed_norm(u, spec, ht));
      break;
    }
    case EventSetSpec::Kind::f0_holder: {
      if (d != 2) throw std::invalid_argument("f0_holder set lives in d = 2");
      push("l2", u.l2_norm());
      auto spec = MixedNormSpec::make(d, 1.0 / set.eps, inf, 0.0, 2.0 * kPi, 0.0,
                                      set.time_samples, 1.0 - set.eps);
      push("flow_w_{1-eps},inf", mixed_norm(u, spec, ht));
      auto pts = holder_pair_points(d, set.pairs, pair_seed);
      PointEvaluator pe(d, u.max_level(), pts);
      push("holder_(1-eps)", holder_quotient(u, set.eps, pe, pts, set.time_samples));
      break;
    }
  }
  return out;
}

/// Tail curve of the Holder quotient statistic (d = 2).
inline TailCurve holder_tail(const CoefficientProfile& gamma, RandomLaw law, double eps,
                             std::span<const double> Ks, int trials, std::uint64_t seed,
                             int time_samples = 16, int pairs = 48, int threads = 1) {
  if (gamma.base.dim() != 2) throw std::invalid_argument("holder_tail: d = 2 only");
  auto pts = holder_pair_points(2, pairs, seed ^ 0x5a5a5a5au);
  PointEvaluator pe(2, gamma.base.max_level(), pts);
  return tail_curve_from(
      [&](std::uint64_t t) {
        return holder_quotient(sample(gamma, law, seed, t), eps, pe, pts, time_samples);
      },
      Ks, trials, seed, threads);
}

}  // namespace hnls
