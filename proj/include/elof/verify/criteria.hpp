#pragma once

// The twelve acceptance checks, shared by the acceptance test binary and the
// `elof check` command. Every tolerance and problem size is fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "elof/config.hpp"
#include "elof/diagnostics.hpp"
#include "elof/frank_energy.hpp"
#include "elof/initial_data.hpp"
#include "elof/io.hpp"
#include "elof/run.hpp"
#include "elof/solver.hpp"
#include "elof/verify/reference.hpp"
#include "elof/verify/sampler.hpp"

namespace elof::verify {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // measured values against their limits
  double seconds = 0.0;
};

namespace detail {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

inline double max_entry(const Mat3& m) {
  double s = 0.0;
  for (const auto& r : m)
    for (double x : r) s = std::max(s, std::abs(x));
  return s;
}

template <int Rank>
double max_diff(const Field<Rank>& a, const Field<Rank>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

inline InitialSpec smooth_spec(std::uint64_t seed, double amplitude, int modes = 1) {
  InitialSpec s;
  s.kind = InitialKind::random_smooth;
  s.amplitude = amplitude;
  s.mode_count = modes;
  s.seed = seed;
  return s;
}

inline FlowState smooth_state(const Grid& g, std::uint64_t seed, double amplitude, const FrankConstants& k,
                              int modes = 1) {
  const InitialSpec s = smooth_spec(seed, amplitude, modes);
  return make_state(make_velocity(s, g), make_director(s, g), k);
}

inline bool finite_record(const DiagnosticsRecord& r) {
  for (double x : r.values())
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace detail

/// 1. Analytic W_p and W_u against central differences of W (step 1e-5).
/// Errors are relative to max(|analytic|, natural scale), the natural scale
/// being k_max |G| for W_p and k_max |G|^2 for W_u: W_u can vanish while W
/// does not, and then only the differencing roundoff eps W / step remains.
inline CriterionResult check_derivatives() {
  constexpr int kSamples = 1000;
  constexpr double kStep = 1e-5, kTol = 1e-6;
  Sampler rng(101);
  double worst_p = 0.0, worst_u = 0.0, raw_u = 0.0;
  for (int s = 0; s < kSamples; ++s) {
    const FrankConstants k = rng.admissible_constants();
    const Vec3 u = rng.unit_vector();
    Mat3 g = rng.matrix();
    const Mat3 wp = dW_dp(u, g, k);
    const Vec3 wu = dW_du(u, g, k);
    const double gg = frobenius_sq(g);
    double ep = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 3; ++i) {
        const double g0 = g[a][i];
        g[a][i] = g0 + kStep;
        const double up = raw::density(u, g, k);
        g[a][i] = g0 - kStep;
        const double dn = raw::density(u, g, k);
        g[a][i] = g0;
        ep = std::max(ep, std::abs((up - dn) / (2 * kStep) - wp[a][i]));
      }
    double eu = 0.0, su = 0.0;
    for (int i = 0; i < 3; ++i) {
      Vec3 x = u;
      x[i] = u[i] + kStep;
      const double up = raw::density(x, g, k);
      x[i] = u[i] - kStep;
      const double dn = raw::density(x, g, k);
      eu = std::max(eu, std::abs((up - dn) / (2 * kStep) - wu[i]));
      su = std::max(su, std::abs(wu[i]));
    }
    worst_p = std::max(worst_p, ep / std::max(detail::max_entry(wp), k.max_abs() * std::sqrt(gg)));
    worst_u = std::max(worst_u, eu / std::max(su, k.max_abs() * gg));
    raw_u = std::max(raw_u, eu / su);
  }
  const bool pass = worst_p <= kTol && worst_u <= kTol;
  return {1, "derivatives match finite differences", pass,
          detail::fmt("%d samples: rel err W_p %.2e, W_u %.2e (limit %.0e); W_u relative to its own norm "
                      "alone %.2e",
                      kSamples, worst_p, worst_u, kTol, raw_u)};
}

/// 2. Pointwise coercivity W >= a|G|^2 and Hessian form >= a|xi|^2.
inline CriterionResult check_ellipticity() {
  constexpr int kSamples = 10000;
  constexpr double kSlack = 1e-10;
  Sampler rng(102);
  int bad_w = 0, bad_h = 0;
  double worst = 0.0;  // most negative (W - a|G|^2) / |G|^2
  for (int s = 0; s < kSamples; ++s) {
    const FrankConstants k = rng.admissible_constants();
    const Vec3 u = rng.unit_vector();
    const Mat3 g = rng.matrix();
    const Mat3 xi = rng.matrix();
    const double gg = frobenius_sq(g);
    const double w = energy_density(u, g, k);
    if (w < k.a() * gg - kSlack) ++bad_w;
    worst = std::min(worst, (w - k.a() * gg) / gg);
    if (d2W_dpdp(u, k).quadratic_form(xi) < k.a() * frobenius_sq(xi) - kSlack) ++bad_h;
  }
  return {2, "pointwise ellipticity of the density", bad_w == 0 && bad_h == 0,
          detail::fmt("%d samples: W below a|G|^2 in %d, Hessian form below a|xi|^2 in %d; "
                      "worst (W - a|G|^2)/|G|^2 = %.3f",
                      kSamples, bad_w, bad_h, worst)};
}

/// 3. k = (1,1,1,0): W = |G|^2 pointwise, and the solver follows a separate
/// implementation of the simplified system.
inline CriterionResult check_equal_constants() {
  constexpr double kPointTol = 1e-12, kStateTol = 1e-8, kDt = 0.004;
  const Grid g(32, detail::kTwoPi);
  const FrankConstants k = FrankConstants::equal();
  FlowState s = detail::smooth_state(g, 103, 0.1, k);
  const TensorField grad = gradient(s.u);
  double point = 0.0;
  for (std::size_t i = 0; i < s.u.points(); ++i) {
    const Mat3 gi = grad.at(i);
    point = std::max(point, std::abs(energy_density(s.u.at(i), gi, k) - frobenius_sq(gi)));
  }
  reference::SimpleState r{s.v, s.u};
  SchemeConfig cfg;
  cfg.dt = kDt;
  for (int n = 0; n < 10; ++n) {
    s = step(s, cfg, k);
    r = reference::step(r, kDt);
  }
  const double du = detail::max_diff(s.u, r.u), dv = detail::max_diff(s.v, r.v);
  return {3, "equal-constant reduction", point <= kPointTol && du <= kStateTol && dv <= kStateTol,
          detail::fmt("max |W - |G|^2| = %.2e (limit %.0e); after 10 steps at N=32: |u - u_ref| = %.2e, "
                      "|v - v_ref| = %.2e (limit %.0e)",
                      point, kPointTol, du, dv, kStateTol)};
}

/// 4. The k4 term integrates to zero on the periodic box.
inline CriterionResult check_null_lagrangian() {
  constexpr int kFields = 100;
  constexpr double kTol = 1e-10;
  const Grid g(16, detail::kTwoPi);
  const FrankConstants k0 = validate_constants(1.2, 1.0, 0.9, 0.0);
  double worst = 0.0;
  for (int f = 0; f < kFields; ++f) {
    FlowState s(g);
    s.u = make_director(detail::smooth_spec(400 + f, 0.6, 2), g);
    const double base = total_energy(s, k0).total;
    for (double kappa : {-0.5, 0.5}) {
      const double e = total_energy(s, validate_constants(1.2, 1.0, 0.9, kappa)).total;
      worst = std::max(worst, std::abs(e - base) / (1.0 + base));
    }
  }
  return {4, "surface term is a null Lagrangian", worst <= kTol,
          detail::fmt("%d fields at N=16, k4 = +-0.5: max |dE|/(1+E) = %.2e (limit %.0e)", kFields, worst, kTol)};
}

/// 5. Energy and the constraint coupling are unchanged by a common rotation.
inline CriterionResult check_rotation_invariance() {
  constexpr int kSamples = 1000;
  constexpr double kTol = 1e-10;
  Sampler rng(105);
  double worst = 0.0;
  for (int s = 0; s < kSamples; ++s) {
    const FrankConstants k = rng.admissible_constants();
    const Vec3 u = rng.unit_vector();
    const Mat3 g = rng.matrix(), gw = rng.matrix(), q = rng.rotation();
    const auto [ru, rg] = apply_rotation(u, g, q);
    const Mat3 rgw = apply_rotation(u, gw, q).second;
    const double scale = 1.0 + frobenius_sq(g) + frobenius_sq(gw);
    worst = std::max(worst, std::abs(energy_density(ru, rg, k) - energy_density(u, g, k)) / scale);
    worst = std::max(worst,
                     std::abs(constraint_coupling(ru, rg, rgw, k) - constraint_coupling(u, g, gw, k)) / scale);
  }
  return {5, "frame rotation invariance", worst <= kTol,
          detail::fmt("%d samples: max relative change %.2e (limit %.0e)", kSamples, worst, kTol)};
}

/// 6. The elastic part of the director right-hand side is tangent to the
/// sphere at every node. Transport is reported, not gated: u.(v.grad u)
/// vanishes only up to the spectral error of the unit-length constraint.
inline CriterionResult check_tangency() {
  constexpr int kStates = 10;
  constexpr double kTol = 1e-8;
  const Grid g(32, detail::kTwoPi);
  Sampler rng(106);
  double elastic = 0.0, transport = 0.0;
  for (int n = 0; n < kStates; ++n) {
    const FrankConstants k = rng.admissible_constants();
    const FlowState s = detail::smooth_state(g, 600 + n, 0.2, k);
    const VectorField r = director_rhs_elastic(s.u, k);
    const VectorField t = director_transport(s.v, s.u);
    const double rs = max_abs(r), ts = max_abs(t);
    for (std::size_t i = 0; i < s.u.points(); ++i) {
      const Vec3 z = s.u.at(i);
      elastic = std::max(elastic, std::abs(dot(z, r.at(i))) / rs);
      transport = std::max(transport, std::abs(dot(z, t.at(i))) / ts);
    }
  }
  return {6, "director update is tangent to the sphere", elastic <= kTol,
          detail::fmt("%d states at N=32: max |u.R| / max|R| = %.2e (limit %.0e); transport, not gated: "
                      "max |u.(v.grad u)| / max|v.grad u| = %.2e",
                      kStates, elastic, kTol, transport)};
}

/// 7. Energy is non-increasing and the balance defect is first order in dt.
inline CriterionResult check_energy_law() {
  constexpr double kT = 0.5, kResTol = 1e-2, kLo = 1.6, kHi = 2.4;
  constexpr double kDt[2] = {0.002, 0.001};
  const Grid g(32, detail::kTwoPi);
  const FrankConstants k = validate_constants(1.2, 1.0, 0.9, 0.2);
  const FlowState s0 = detail::smooth_state(g, 4, 0.15, k);
  double res[2];
  bool monotone = true;
  for (int r = 0; r < 2; ++r) {
    SchemeConfig cfg;
    cfg.dt = kDt[r];
    FlowState s = s0;
    EnergyBalance b;
    b.add({s.t, total_energy(s, k).total, dissipation_rate(s, k)});
    while (s.t < kT - 1e-12) {
      s = step(s, cfg, k);
      b.add({s.t, total_energy(s, k).total, dissipation_rate(s, k)});
    }
    monotone = monotone && b.non_increasing();
    res[r] = b.residual();
  }
  const double ratio = res[0] / res[1];
  const bool pass = monotone && res[0] <= kResTol && res[1] <= kResTol && ratio >= kLo && ratio <= kHi;
  return {7, "energy dissipation law", pass,
          detail::fmt("N=32, T=0.5: E non-increasing %s; residual %.3e (dt %.3g), %.3e (dt %.3g), limit %.0e; "
                      "ratio %.3f in [%.1f, %.1f]",
                      monotone ? "yes" : "no", res[0], kDt[0], res[1], kDt[1], kResTol, ratio, kLo, kHi)};
}

/// 8. Critical ball norms and one time step commute with the lambda = 2 rescaling.
inline CriterionResult check_scaling() {
  constexpr double kTol = 1e-6, kRadius = 1.2, kDt = 0.004;
  const Grid g(16, detail::kTwoPi);
  const FrankConstants k = validate_constants(1.2, 1.0, 0.9, 0.2);
  double gap = 0.0, step_gap = 0.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto r = scaling_check(detail::smooth_state(g, 800 + seed, 0.2, k), 2, kRadius, k, 2, kDt);
    gap = std::max(gap, r.relative_gap);
    step_gap = std::max(step_gap, r.step_gap);
  }
  return {8, "scaling invariance", gap <= kTol && step_gap <= kTol,
          detail::fmt("3 states, lambda=2, R=%.1f: norm gap %.2e, one-step gap %.2e (limit %.0e)", kRadius, gap,
                      step_gap, kTol)};
}

/// 9. div v stays at roundoff over a long run, and reruns are bitwise identical.
inline CriterionResult check_incompressibility_determinism() {
  constexpr int kSteps = 200;
  constexpr double kTol = 1e-9;
  const Grid g(32, detail::kTwoPi);
  const FrankConstants k = validate_constants(1.2, 1.0, 0.9, 0.2);
  auto run_once = [&](double& worst) {
    FlowState s = detail::smooth_state(g, 9, 0.2, k, 2);
    SchemeConfig cfg;
    cfg.dt = 0.004;
    for (int n = 0; n < kSteps; ++n) {
      StepReport rep;
      s = step(s, cfg, k, &rep);
      worst = std::max(worst, max_abs(divergence(s.v)));
    }
    return encode_snapshot(s);
  };
  double worst = 0.0;
  const auto a = run_once(worst);
  const auto b = run_once(worst);
  const bool same = a == b;
  return {9, "incompressibility and determinism", worst <= kTol && same,
          detail::fmt("%d steps at N=32: max |div v| = %.2e (limit %.0e); rerun snapshots %s", kSteps, worst, kTol,
                      same ? "bit-identical" : "DIFFER")};
}

/// 10. Twin runs separated by 1e-6: the gap functional obeys an exponential
/// bound whose rate is stable under dt refinement; identical twins stay together.
inline CriterionResult check_uniqueness() {
  constexpr double kDelta = 1e-6, kT = 0.25, kStable = 0.2, kSameTol = 1e-24;
  constexpr double kDt[2] = {0.01, 0.005};
  const Grid g(16, detail::kTwoPi);
  const FrankConstants k = validate_constants(1.2, 1.0, 0.9, 0.2);
  const InitialSpec base = detail::smooth_spec(11, 0.15), pert = detail::smooth_spec(12, 1.0);
  const VectorField v = make_velocity(base, g);
  const DirectorField u = make_director(base, g);
  VectorField v2 = v;
  v2.axpy(kDelta, make_velocity(pert, g));
  DirectorField u2 = u;
  u2.axpy(kDelta, make_director(pert, g));
  renormalize(u2);

  double rate[2], same = 0.0, phi0 = 0.0;
  bool bounded = true;
  for (int r = 0; r < 2; ++r) {
    SchemeConfig cfg;
    cfg.dt = kDt[r];
    FlowState a = make_state(v, u, k), b = make_state(v2, u2, k), c = a;
    std::vector<double> ts{0.0}, phis{uniqueness_gap(a, b).phi};
    while (a.t < kT - 1e-12) {
      a = step(a, cfg, k);
      b = step(b, cfg, k);
      c = step(c, cfg, k);
      ts.push_back(a.t);
      phis.push_back(uniqueness_gap(a, b).phi);
      same = std::max(same, uniqueness_gap(a, c).phi);
    }
    phi0 = phis[0];
    rate[r] = fit_growth_rate(ts, phis);
    for (std::size_t i = 0; i < ts.size(); ++i)
      bounded = bounded && phis[i] <= phis[0] * std::exp(rate[r] * ts[i]) * (1.0 + 1e-12);
  }
  const bool finite = std::isfinite(rate[0]) && std::isfinite(rate[1]);
  const double spread = std::abs(rate[0] - rate[1]) / std::max(std::abs(rate[1]), 1e-300);
  const bool pass = finite && bounded && spread <= kStable && same <= kSameTol;
  return {10, "stability of the uniqueness gap", pass,
          detail::fmt("N=16, Phi(0) = %.3e: C_fit = %.4f (dt %.3g), %.4f (dt %.3g), spread %.1f%% (limit %.0f%%); "
                      "identical twins max Phi %.1e (limit %.0e)",
                      phi0, rate[0], kDt[0], rate[1], kDt[1], 100 * spread, 100 * kStable, same, kSameTol)};
}

/// 11. A large, under-resolved explicit run hits the ceiling with finite output
/// and exits with status 2.
inline CriterionResult check_blowup_monitor() {
  namespace fs = std::filesystem;
  RunConfig c;
  c.t_end = 5.0;
  c.grid.n = 16;
  c.scheme.scheme = Scheme::explicit_rk2;
  c.scheme.dt = 0.05;
  c.scheme.enforce_cfl = false;
  c.initial = detail::smooth_spec(3, 1.0, 3);
  c.diag.cadence = 1;
  c.diag.radii = {1.0};
  c.diag.eps0 = 50.0;
  const fs::path dir = fs::temp_directory_path() / "elof_check_blowup";
  fs::remove_all(dir);
  c.output.dir = dir.string();

  const RunOutcome out = run(c);
  const auto rows = read_diagnostics((dir / "diagnostics.csv").string());
  bool finite = !rows.empty();
  for (const auto& r : rows) finite = finite && detail::finite_record(r);
  const FlowState last = read_snapshot((dir / "final.elof").string());
  for (double x : last.v.data()) finite = finite && std::isfinite(x);
  for (double x : last.u.data()) finite = finite && std::isfinite(x);
  const bool by_ceiling = out.blowup && out.reason.find("ceiling") != std::string::npos;
  const int code = exit_code(out);
  fs::remove_all(dir);
  return {11, "blow-up ceiling stops the run", by_ceiling && finite && code == 2,
          detail::fmt("RK2 N=16 dt 0.05 amplitude 1: flagged %s at t = %.3g (%s); %zu rows all finite %s; exit %d",
                      out.blowup ? "yes" : "no", out.blowup_time, out.reason.c_str(), rows.size(),
                      finite ? "yes" : "no", code)};
}

/// 12. The local L^3 interpolation ratio has a uniform empirical bound that
/// does not drift with resolution.
inline CriterionResult check_interpolation() {
  constexpr int kFields = 100;
  constexpr double kCeiling = 50.0, kStable = 0.2;
  const double length = detail::kTwoPi;
  double worst[2] = {0.0, 0.0};
  const int sizes[2] = {16, 32};
  for (int n = 0; n < 2; ++n) {
    const Grid g(sizes[n], length);
    for (int f = 0; f < kFields; ++f) {
      const VectorField v = make_velocity(detail::smooth_spec(100 + f, 1.0, 2), g);
      const TensorField gv = gradient(v);
      for (double r : {length / 8, length / 4})
        for (int k = 0; k < 4; ++k)
          for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) {
              const Ball b{{length / 4 * i, length / 4 * j, length / 4 * k}, r};
              worst[n] = std::max(worst[n], interpolation_terms(v, gv, b).ratio);
            }
    }
  }
  const double drift = std::abs(worst[0] - worst[1]) / worst[1];
  return {12, "local interpolation inequality", worst[0] <= kCeiling && worst[1] <= kCeiling && drift <= kStable,
          detail::fmt("%d fields, r in {L/8, L/4}, 64 centers: max ratio %.4f (N=16), %.4f (N=32), limit %.0f; "
                      "drift %.1f%% (limit %.0f%%)",
                      kFields, worst[0], worst[1], kCeiling, 100 * drift, 100 * kStable)};
}

using CriterionFn = CriterionResult (*)();

inline const std::vector<CriterionFn>& all_criteria() {
  static const std::vector<CriterionFn> list{
      check_derivatives,    check_ellipticity,     check_equal_constants,
      check_null_lagrangian, check_rotation_invariance, check_tangency,
      check_energy_law,     check_scaling,         check_incompressibility_determinism,
      check_uniqueness,     check_blowup_monitor,  check_interpolation};
  return list;
}

/// Runs one criterion, timing it; exceptions count as failures.
inline CriterionResult run_criterion(int id) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = all_criteria().at(static_cast<std::size_t>(id - 1))();
  } catch (const std::exception& e) {
    r = {id, "criterion " + std::to_string(id), false, std::string("threw: ") + e.what()};
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline std::string format_result(const CriterionResult& r) {
  return detail::fmt("[%2d] %-44s %s  (%.1fs)  %s", r.id, r.name.c_str(), r.pass ? "PASS" : "FAIL", r.seconds,
                     r.detail.c_str());
}

}  // namespace elof::verify
