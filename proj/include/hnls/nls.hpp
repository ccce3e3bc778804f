#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "hnls/transform.hpp"

namespace hnls {

namespace detail {

/// Gauss-Legendre rule on [0, 1] (Golub-Welsch on the Jacobi matrix).
inline const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre_01() {
  static const auto rule = [] {
    const int n = 64;
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (int k = 1; k < n; ++k) sub[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub);
    std::pair<std::vector<double>, std::vector<double>> out;
    for (int k = 0; k < n; ++k) {
      out.first.push_back(0.5 * (es.eigenvalues()[k] + 1.0));
      out.second.push_back(es.eigenvectors()(0, k) * es.eigenvectors()(0, k));
    }
    return out;
  }();
  return rule;
}

// int_0^x (sin 2u)^theta du for x in [0, pi/4], theta in (-1, 0): substitute
// v = u^{1+theta} to absorb the endpoint singularity.
inline double singular_quarter_integral(double x, double theta) {
  if (x <= 0.0) return 0.0;
  const auto& [nodes, weights] = gauss_legendre_01();
  const double vmax = std::pow(x, 1.0 + theta);
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double v = vmax * nodes[i];
    const double u = std::pow(v, 1.0 / (1.0 + theta));
    const double ratio = u > 0.0 ? std::sin(2.0 * u) / (2.0 * u) : 1.0;
    acc += weights[i] * std::pow(ratio, theta);
  }
  return std::pow(2.0, theta) / (1.0 + theta) * vmax * acc;
}

}  // namespace detail

/// Equation i du/dt - H u = sign * coupling * w(t) |u|^{p-1} u with
/// w(t) = cos(2t)^theta (|cos|^theta for fractional theta).
struct EquationSpec {
  int dim = 2;
  double p = 3.0;
  int sign = +1;              // +1 defocusing, -1 focusing
  bool harmonic = true;       // false only for the free reference solver
  double theta = 0.0;
  double coupling = 1.0;      // 0 switches the nonlinear term off

  /// The autonomous equation (theta = 0).
  static EquationSpec autonomous(int dim, double p, int sign = +1) {
    EquationSpec s{dim, p, sign, true, 0.0, 1.0};
    s.validate();
    return s;
  }
  /// Weight matching the lens image of free NLS: theta = (d/2)(p-1) - 2.
  static EquationSpec lens_weighted(int dim, double p, int sign = +1) {
    EquationSpec s{dim, p, sign, true, 0.5 * dim * (p - 1.0) - 2.0, 1.0};
    s.validate();
    return s;
  }
  /// d=2 subcritical variant with the integrable singular weight theta = p-3.
  static EquationSpec subcritical_weighted(double p, int sign = +1) {
    if (!(p > 2.0 && p < 3.0))
      throw std::invalid_argument("subcritical_weighted: need p in (2,3)");
    EquationSpec s{2, p, sign, true, p - 3.0, 1.0};
    return s;
  }

  void validate() const {
    check_dim(dim);
    const bool odd_integer = p >= 3.0 && std::floor(p) == p && static_cast<long>(p) % 2 == 1;
    const bool subcritical = dim == 2 && p > 2.0 && p < 3.0;
    if (!odd_integer && !subcritical)
      throw std::invalid_argument("EquationSpec: p must be an odd integer >= 3, or in (2,3) with d=2");
    if (theta < -1.0) throw std::invalid_argument("EquationSpec: theta must be > -1");
  }

  double weight(double t) const {
    if (theta == 0.0) return 1.0;
    const double c = std::cos(2.0 * t);
    if (theta == std::floor(theta) && theta > 0.0)
      return std::pow(c, theta);
    return std::pow(std::abs(c), theta);
  }

  /// Exact (or quadrature-exact for fractional theta) antiderivative of the
  /// weight across [t0, t1]; the nonlinear phase uses this, not w(t) dt.
  double weight_integral(double t0, double t1) const {
    if (theta == 0.0) return t1 - t0;
    if (t1 < t0) return -weight_integral(t1, t0);
    if (theta > 0.0 && theta == std::floor(theta)) {
      // cos^n(2t) expanded into cosines: 2^{-n} sum_k C(n,k) cos(2(n-2k)t)
      const int n = static_cast<int>(theta);
      auto antideriv = [&](double t) {
        double acc = 0.0;
        for (int k = 0; k <= n; ++k) {
          const double coef = static_cast<double>(binomial(n, k)) * std::pow(2.0, -n);
          const int m = n - 2 * k;
          acc += m == 0 ? coef * t : coef * std::sin(2.0 * m * t) / (2.0 * m);
        }
        return acc;
      };
      return antideriv(t1) - antideriv(t0);
    }
    // fractional theta in (-1, 0): integrate |cos 2t|^theta piecewise between
    // the zeros z_k = pi/4 + k pi/2, symmetric about each midpoint.
    auto primitive_from_zero = [&](double z, double x) {  // int over [z, z+x], x in [0, pi/4]
      return detail::singular_quarter_integral(x, theta);
    };
    double acc = 0.0;
    double a = t0;
    while (a < t1 - 1e-300) {
      const double kf = std::floor((a - kPi / 4.0) / (kPi / 2.0));
      const double z_left = kPi / 4.0 + kf * kPi / 2.0;        // zero at or before a
      const double z_right = z_left + kPi / 2.0;               // next zero
      const double b = std::min(t1, z_right);
      const double mid = 0.5 * (z_left + z_right);
      auto seg = [&](double lo, double hi) {  // both within one half, measured from nearest zero
        if (hi <= mid)
          return primitive_from_zero(z_left, hi - z_left) - primitive_from_zero(z_left, lo - z_left);
        return primitive_from_zero(z_right, z_right - lo) - primitive_from_zero(z_right, z_right - hi);
      };
      if (b <= mid || a >= mid)
        acc += seg(a, b);
      else
        acc += seg(a, mid) + seg(mid, b);
      a = b;
    }
    return acc;
  }
};

/// ||u||_{L^2}^2 (Parseval).
inline double mass(const SpectralField& u) {
  const double n = u.l2_norm();
  return n * n;
}

/// E(u) = ||u||_{H^1}^2 + sign (2/(p+1)) ||u||_{L^{p+1}}^{p+1}; for the cubic
/// equation this is the conserved energy of the autonomous flow.
inline double energy(const SpectralField& u, const EquationSpec& spec,
                     const HermiteTransform& ht) {
  const double h1 = u.sobolev_norm(1.0);
  const double lp = ht.wsp_norm(u, 0.0, spec.p + 1.0);
  return h1 * h1 + spec.sign * spec.coupling * (2.0 / (spec.p + 1.0)) * std::pow(lp, spec.p + 1.0);
}

/// Strang stepper: half nonlinear phase, exact linear flow, half nonlinear
/// phase, with the nonlinear term evaluated on the de-aliasing grid and
/// projected back to the level cap. Trailing/leading half kicks merge
/// between diagnostic closures.
class NlsStepper {
 public:
  NlsStepper(EquationSpec spec, const HermiteTransform& ht) : spec_(spec), ht_(&ht) {
    if (!spec.harmonic)
      throw std::invalid_argument("NlsStepper: Hermite frame requires the harmonic potential");
  }

  bool blown_up() const { return blowup_; }
  double blowup_time() const { return blowup_time_; }

  /// Integrate u from t0 to t1 in nsteps Strang steps (closed bracket).
  void advance(SpectralField& u, double t0, double t1, int nsteps) const {
    if (nsteps < 1) throw std::invalid_argument("advance: nsteps >= 1");
    if (blowup_) return;
    const double dt = (t1 - t0) / nsteps;
    if (spec_.coupling == 0.0) {  // linear limit
      u = u.propagated(t1 - t0);
      return;
    }
    double t = t0;
    kick(u, spec_.weight_integral(t, t + 0.5 * dt));
    for (int k = 0; k < nsteps; ++k) {
      u = u.propagated(dt);
      if (k + 1 == nsteps)
        kick(u, spec_.weight_integral(t + 0.5 * dt, t + dt));
      else
        kick(u, spec_.weight_integral(t + 0.5 * dt, t + 1.5 * dt));
      t += dt;
      if (!u.all_finite()) {
        blowup_ = true;
        blowup_time_ = t;
        return;
      }
    }
  }

 private:
  void kick(SpectralField& u, double wint) const {
    std::vector<cplx> vals = ht_->inverse(u);
    const double pm1 = spec_.p - 1.0;
    const double c = -spec_.sign * spec_.coupling * wint;
    if (pm1 == 2.0) {
      for (auto& v : vals) v *= std::polar(1.0, c * std::norm(v));
    } else {
      for (auto& v : vals) v *= std::polar(1.0, c * std::pow(std::abs(v), pm1));
    }
    u = ht_->forward(vals);
  }

  EquationSpec spec_;
  const HermiteTransform* ht_;
  mutable bool blowup_ = false;
  mutable double blowup_time_ = 0.0;
};

/// One Strang step (open API used by the convergence tests).
inline SpectralField strang_step(const SpectralField& u, double t, double dt,
                                 const EquationSpec& spec, const HermiteTransform& ht) {
  SpectralField v = u;
  NlsStepper(spec, ht).advance(v, t, t + dt, 1);
  return v;
}

struct DiagRow {
  double t;
  double mass;
  double energy;
  double h1;
  double hs_fluct;  // H^s norm of u - e^{-itH} u0 at the probe regularity
};

struct SolveOptions {
  double dt = 1e-3;
  double t_final = 1.0;
  int diag_stride = 1;      // steps between diagnostic closures
  int snapshot_stride = 0;  // 0: initial and final only
  double fluct_probe_s = 0.5;
};

struct Trajectory {
  std::vector<DiagRow> diag;
  std::vector<double> snapshot_times;
  std::vector<SpectralField> snapshots;
  bool blowup = false;
  double blowup_time = 0.0;
};

inline Trajectory solve(const SpectralField& u0, const EquationSpec& spec,
                        const SolveOptions& opt, const HermiteTransform& ht) {
  if (opt.t_final == 0.0 || opt.dt <= 0.0)
    throw std::invalid_argument("solve: need t_final != 0 and dt > 0");
  const double dir = opt.t_final > 0 ? 1.0 : -1.0;
  const int nsteps = std::max(1, static_cast<int>(std::ceil(std::abs(opt.t_final) / opt.dt - 1e-9)));
  const double dt = opt.t_final / nsteps;
  NlsStepper stepper(spec, ht);
  Trajectory traj;
  SpectralField u = u0;
  auto record = [&](double t, const SpectralField& v) {
    DiagRow row;
    row.t = t;
    row.mass = mass(v);
    row.energy = energy(v, spec, ht);
    row.h1 = v.sobolev_norm(1.0);
    row.hs_fluct = (v - u0.propagated(t)).sobolev_norm(opt.fluct_probe_s);
    traj.diag.push_back(row);
  };
  record(0.0, u);
  traj.snapshot_times.push_back(0.0);
  traj.snapshots.push_back(u);
  int k = 0;
  while (k < nsteps) {
    const int chunk = std::min(opt.diag_stride < 1 ? nsteps : opt.diag_stride, nsteps - k);
    const double t0 = k * dt;
    const double t1 = (k + chunk) * dt;
    stepper.advance(u, t0, t1, chunk);
    if (stepper.blown_up()) {
      traj.blowup = true;
      traj.blowup_time = stepper.blowup_time();
      break;
    }
    k += chunk;
    record(t1, u);
    if ((opt.snapshot_stride > 0 && k % opt.snapshot_stride == 0) || k == nsteps) {
      traj.snapshot_times.push_back(t1);
      traj.snapshots.push_back(u);
    }
  }
  (void)dir;
  return traj;
}

/// Integrate through a checkpoint list; ceil(|gap|/dt) equal substeps per gap.
inline std::vector<SpectralField> solve_at(const SpectralField& u0, const EquationSpec& spec,
                                           std::span<const double> times, double dt,
                                           const HermiteTransform& ht,
                                           bool* blowup = nullptr) {
  NlsStepper stepper(spec, ht);
  std::vector<SpectralField> out;
  out.reserve(times.size());
  SpectralField u = u0;
  double t = 0.0;
  for (double target : times) {
    if (target != t) {
      const int n = std::max(1, static_cast<int>(std::ceil(std::abs(target - t) / dt - 1e-9)));
      stepper.advance(u, t, target, n);
      t = target;
    }
    out.push_back(u);
  }
  if (blowup) *blowup = stepper.blown_up();
  return out;
}

// ---------------------------------------------------------------------------
// Duhamel fixed point.
// ---------------------------------------------------------------------------

/// Discrete stand-in for the Strichartz-space norm: the max of L^inf_t H^s
/// and the (4,4) mixed norm, plus the (2, 6) pair in d=3.
inline double xst_proxy_norm(std::span<const SpectralField> v, double dt, double s,
                             const HermiteTransform& ht) {
  double linf_hs = 0.0, l4w4 = 0.0, l2w6 = 0.0;
  for (const auto& f : v) {
    linf_hs = std::max(linf_hs, f.sobolev_norm(s));
    l4w4 += dt * std::pow(ht.wsp_norm(f, s, 4.0), 4.0);
    if (f.dim() == 3) l2w6 += dt * std::pow(ht.wsp_norm(f, s, 6.0), 2.0);
  }
  double out = std::max(linf_hs, std::pow(l4w4, 0.25));
  if (!v.empty() && v.front().dim() == 3) out = std::max(out, std::sqrt(l2w6));
  return out;
}

struct PicardReport {
  std::vector<double> iterate_norms;  // X^s_T proxy of v_k
  std::vector<double> diff_norms;     // proxy of v_{k+1} - v_k
  std::vector<double> ratios;         // successive diff ratios
  bool diverged = false;
  std::vector<SpectralField> final_iterate;  // on the uniform time grid
  double time_step = 0.0;
};

/// Picard iteration v_{k+1} = L(v_k) for the Duhamel operator of the
/// equation, discretized on a uniform time grid with trapezoidal
/// accumulation of the interaction-picture integrand.
inline PicardReport picard_iterate(const SpectralField& u0, const EquationSpec& spec,
                                   double T, int iterations, double s,
                                   const HermiteTransform& ht, int time_nodes = 64) {
  if (T <= 0.0 || iterations < 1) throw std::invalid_argument("picard_iterate: bad arguments");
  const int J = time_nodes;
  const double dt = T / J;
  const std::size_t nn = static_cast<std::size_t>(J) + 1;
  std::vector<SpectralField> linear;  // e^{-it H} u0 on nodes
  linear.reserve(nn);
  for (int j = 0; j <= J; ++j) linear.push_back(u0.propagated(j * dt));

  std::vector<SpectralField> v(nn, SpectralField(u0.dim(), u0.max_level()));
  PicardReport rep;
  rep.time_step = dt;
  const cplx pref = -kI * static_cast<double>(spec.sign) * spec.coupling;
  for (int it = 0; it < iterations; ++it) {
    // integrand in the interaction picture: G(t) = e^{itH} w(t) N(e^{-itH}u0 + v)
    std::vector<SpectralField> g;
    g.reserve(nn);
    for (int j = 0; j <= J; ++j) {
      SpectralField z = linear[static_cast<std::size_t>(j)] + v[static_cast<std::size_t>(j)];
      std::vector<cplx> vals = ht.inverse(z);
      const double w = spec.weight(j * dt);
      for (auto& val : vals) val *= w * std::pow(std::abs(val), spec.p - 1.0);
      g.push_back(ht.forward(vals).propagated(-j * dt));
    }
    std::vector<SpectralField> vnew;
    vnew.reserve(nn);
    SpectralField cum(u0.dim(), u0.max_level());
    vnew.push_back(cum);  // v(0) = 0
    for (int j = 1; j <= J; ++j) {
      SpectralField inc = g[static_cast<std::size_t>(j - 1)] + g[static_cast<std::size_t>(j)];
      inc *= cplx(0.5 * dt);
      cum += inc;
      vnew.push_back((pref * cum).propagated(j * dt));
    }
    double diff = 0.0;
    {
      std::vector<SpectralField> delta;
      delta.reserve(nn);
      for (std::size_t j = 0; j < nn; ++j) delta.push_back(vnew[j] - v[j]);
      diff = xst_proxy_norm(delta, dt, s, ht);
    }
    v = std::move(vnew);
    rep.iterate_norms.push_back(xst_proxy_norm(v, dt, s, ht));
    rep.diff_norms.push_back(diff);
    if (rep.diff_norms.size() >= 2) {
      const double prev = rep.diff_norms[rep.diff_norms.size() - 2];
      rep.ratios.push_back(prev > 0 ? diff / prev : 0.0);
    }
  }
  int sustained = 0;
  for (double r : rep.ratios) sustained = r > 1.0 ? sustained + 1 : 0;
  rep.diverged = sustained >= 3;
  rep.final_iterate = std::move(v);
  return rep;
}

// ---------------------------------------------------------------------------
// Fluctuation regularity probe.
// ---------------------------------------------------------------------------

struct FluctuationRow {
  int level_cap;
  double sigma;
  double fluct_norm;  // H^sigma of u(T) - e^{-iTH} u0
  double full_norm;   // H^sigma of u(T)
};

struct FluctuationReport {
  std::vector<FluctuationRow> rows;
  LinearFit short_time_slope;  // log fluct H^s norm against log T
};

/// Smoothing probe: the fluctuation u - e^{-itH}u0 holds its H^sigma norms
/// as the level cap doubles while the rough solution's norms grow, and its
/// size is O(T) for short times.
inline FluctuationReport fluctuation_gain(const CoefficientProfile& gamma, RandomLaw law,
                                          std::uint64_t seed, std::uint64_t trial,
                                          const EquationSpec& spec, double T, double dt,
                                          std::span<const double> sigmas,
                                          std::span<const int> level_caps,
                                          int grid_padding = 8) {
  FluctuationReport rep;
  for (int cap : level_caps) {
    // restrict the profile to the cap, then sample with shared draws
    CoefficientProfile pc{SpectralField(gamma.base.dim(), cap), gamma.regularity};
    for (std::size_t i = 0; i < pc.base.size(); ++i) {
      const auto& mi = pc.base.modes().mode(i);
      if (mi.total() <= gamma.base.max_level())
        pc.base[i] = gamma.base[static_cast<std::size_t>(flat_index(mi))];
    }
    auto u0 = sample(pc, law, seed, trial);
    HermiteTransform ht(make_grid(gamma.base.dim(), cap, static_cast<int>(spec.p), grid_padding), cap);
    std::vector<double> times{T};
    auto snaps = solve_at(u0, spec, times, dt, ht);
    const SpectralField fluct = snaps.back() - u0.propagated(T);
    for (double sg : sigmas)
      rep.rows.push_back({cap, sg, fluct.sobolev_norm(sg), snaps.back().sobolev_norm(sg)});
  }
  // short-time scaling at the largest cap
  {
    const int cap = level_caps.back();
    CoefficientProfile pc{SpectralField(gamma.base.dim(), cap), gamma.regularity};
    for (std::size_t i = 0; i < pc.base.size(); ++i) {
      const auto& mi = pc.base.modes().mode(i);
      if (mi.total() <= gamma.base.max_level())
        pc.base[i] = gamma.base[static_cast<std::size_t>(flat_index(mi))];
    }
    auto u0 = sample(pc, law, seed, trial);
    HermiteTransform ht(make_grid(gamma.base.dim(), cap, static_cast<int>(spec.p), grid_padding), cap);
    std::vector<double> lx, ly, lw;
    for (double tf : {T / 8.0, T / 4.0, T / 2.0, T}) {
      std::vector<double> times{tf};
      auto snaps = solve_at(u0, spec, times, dt, ht);
      const double nrm = (snaps.back() - u0.propagated(tf)).sobolev_norm(sigmas.empty() ? 0.5 : sigmas[0]);
      if (nrm > 0) {
        lx.push_back(std::log(tf));
        ly.push_back(std::log(nrm));
        lw.push_back(1.0);
      }
    }
    if (lx.size() >= 3) rep.short_time_slope = weighted_linear_fit(lx, ly, lw);
  }
  return rep;
}

}  // namespace hnls
