#pragma once

// Right-hand sides, pressure recovery and time stepping for the coupled
// velocity / director system with unit viscosity and unit director mobility:
//
//   v_t + (v.grad) v + grad p = lap v - div S,     div v = 0,
//   u_t + (v.grad) u          = R(u),
//
// where S[j][i] = d_i u^k W_{p_j^k} is the elastic stress and R is the
// tangential elastic force.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "elof/errors.hpp"
#include "elof/frank_energy.hpp"
#include "elof/grid.hpp"
#include "elof/operators.hpp"

namespace elof {

using VelocityField = VectorField;
using DirectorField = VectorField;
using PressureField = ScalarField;

/// Director drift accepted by the solver on entry to a step.
inline constexpr double kSolverUnitTolerance = 1e-6;

struct FlowState {
  VelocityField v;
  DirectorField u;
  PressureField p;
  double t = 0.0;
  std::int64_t steps = 0;

  explicit FlowState(const Grid& g) : v(g), u(g), p(g) {}
  FlowState(VelocityField v_, DirectorField u_, PressureField p_, double t_ = 0.0)
      : v(std::move(v_)), u(std::move(u_)), p(std::move(p_)), t(t_) {
    require_same_grid(v.grid(), u.grid());
    require_same_grid(v.grid(), p.grid());
  }

  const Grid& grid() const noexcept { return v.grid(); }
};

enum class Scheme { imex_a_split, explicit_rk2 };

inline std::string_view scheme_name(Scheme s) {
  return s == Scheme::imex_a_split ? "imex_a_split" : "explicit_rk2";
}

inline std::optional<Scheme> parse_scheme(std::string_view name) {
  if (name == "imex_a_split") return Scheme::imex_a_split;
  if (name == "explicit_rk2") return Scheme::explicit_rk2;
  return std::nullopt;
}

struct SchemeConfig {
  std::optional<double> dt;  // fixed step; when empty, cfl * stability limit
  double cfl = 0.5;
  Scheme scheme = Scheme::imex_a_split;
  int renormalize_every = 1;
  bool dealias = true;
  DiffMode diff = DiffMode::spectral;
  bool enforce_cfl = true;  // a fixed dt above the limit throws CflViolation

  void validate() const {
    if (dt && !(*dt > 0.0 && std::isfinite(*dt))) throw std::invalid_argument("dt must be positive");
    if (!dt && !(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("cfl must lie in (0, 1]");
    if (renormalize_every < 1) throw std::invalid_argument("renormalize_every must be >= 1");
  }

  friend bool operator==(const SchemeConfig&, const SchemeConfig&) = default;
};

struct StepReport {
  double dt = 0.0;
  double max_unit_drift = 0.0;  // before renormalization
  double div_v_inf = 0.0;
};

// ---------------------------------------------------------------------------
// Pointwise helpers.

inline double max_unit_drift(const DirectorField& u) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.points(); ++i) {
    const double d = std::abs(std::sqrt(u.magnitude_sq(i)) - 1.0);
    if (!(d <= m)) m = d;  // NaN propagates
  }
  return m;
}

inline void require_unit_director(const DirectorField& u, double tolerance = kSolverUnitTolerance) {
  const double d = max_unit_drift(u);
  if (!(d <= tolerance)) throw NonUnitDirector(d);
}

/// Removes the component of a director increment along u, nodewise.
inline void project_to_tangent(const DirectorField& u, VectorField& du) {
  for (std::size_t i = 0; i < u.points(); ++i) {
    const Vec3 z = u.at(i);
    const Vec3 d = du.at(i);
    const double zd = dot(z, d);
    du.set(i, {d[0] - zd * z[0], d[1] - zd * z[1], d[2] - zd * z[2]});
  }
}

/// u <- u / |u| nodewise. Nodes already unit to within a few ulp are left
/// untouched so that exact unit vectors stay bitwise fixed.
inline void renormalize(DirectorField& u) {
  for (std::size_t i = 0; i < u.points(); ++i) {
    const double n = std::sqrt(u.magnitude_sq(i));
    if (std::abs(n - 1.0) <= 0x1p-50) continue;
    for (int c = 0; c < 3; ++c) u(c, i) /= n;
  }
}

namespace detail {

template <int Rank>
Field<Rank> maybe_dealias(Field<Rank> f, bool on) {
  return on ? dealias(f) : f;
}

/// W_p and W_u sampled at every node from the director and its gradient.
struct ElasticFields {
  TensorField grad;
  TensorField wp;
  VectorField wu;
};

inline ElasticFields elastic_fields(const DirectorField& u, const FrankConstants& k, DiffMode mode) {
  ElasticFields e{gradient(u, mode), TensorField(u.grid()), VectorField(u.grid())};
  for (std::size_t i = 0; i < u.points(); ++i) {
    const Vec3 z = u.at(i);
    const Mat3 g = e.grad.at(i);
    e.wp.set(i, raw::density_dp(z, g, k));
    e.wu.set(i, raw::density_du(z, g, k));
  }
  return e;
}

/// (a.grad) b with grad b already available: out^i = sum_j a^j gb[j][i].
inline VectorField advect(const VectorField& a, const TensorField& gb) {
  VectorField out(a.grid());
  for (std::size_t i = 0; i < a.points(); ++i) {
    const Vec3 w = a.at(i);
    const Mat3 g = gb.at(i);
    Vec3 r{};
    for (int j = 0; j < 3; ++j)
      for (int c = 0; c < 3; ++c) r[c] += w[j] * g[j][c];
    out.set(i, r);
  }
  return out;
}

/// S[j][i] = sum_k wp[j][k] grad[i][k]
inline TensorField stress_from(const TensorField& grad, const TensorField& wp) {
  TensorField s(grad.grid());
  for (std::size_t i = 0; i < grad.points(); ++i) {
    const Mat3 g = grad.at(i);
    const Mat3 w = wp.at(i);
    Mat3 out{};
    for (int j = 0; j < 3; ++j)
      for (int c = 0; c < 3; ++c)
        for (int m = 0; m < 3; ++m) out[j][c] += w[j][m] * g[c][m];
    s.set(i, out);
  }
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Right-hand sides.

/// sigma_{ji} = d_i u^k W_{p_j^k}, stored as S[j][i].
inline TensorField elastic_stress(const DirectorField& u, const FrankConstants& k,
                                  const SchemeConfig& cfg = {}) {
  require_unit_director(u);
  const auto e = detail::elastic_fields(u, k, cfg.diff);
  return detail::maybe_dealias(detail::stress_from(e.grad, e.wp), cfg.dealias);
}

/// Tangential elastic force R = h - (u.h) u with h = div W_p - W_u. Expanding
/// the divergence of the constrained flux W_p - u (u.W_p) and the lower-order
/// terms of the director equation gives exactly this projection, for any u.
inline VectorField director_rhs_elastic(const DirectorField& u, const FrankConstants& k,
                                        const SchemeConfig& cfg = {}) {
  require_unit_director(u);
  const auto e = detail::elastic_fields(u, k, cfg.diff);
  VectorField h = divergence(detail::maybe_dealias(e.wp, cfg.dealias), cfg.diff);
  h -= detail::maybe_dealias(e.wu, cfg.dealias);
  for (std::size_t i = 0; i < u.points(); ++i) {
    const Vec3 z = u.at(i);
    const Vec3 hv = h.at(i);
    const double zh = dot(z, hv);
    h.set(i, {hv[0] - zh * z[0], hv[1] - zh * z[1], hv[2] - zh * z[2]});
  }
  return h;
}

/// (v.grad) u, dealiased.
inline VectorField director_transport(const VelocityField& v, const DirectorField& u,
                                      const SchemeConfig& cfg = {}) {
  return detail::maybe_dealias(detail::advect(v, gradient(u, cfg.diff)), cfg.dealias);
}

/// Full u_t: R(u) - (v.grad) u.
inline VectorField director_rhs(const FlowState& s, const FrankConstants& k, const SchemeConfig& cfg = {}) {
  VectorField r = director_rhs_elastic(s.u, k, cfg);
  r -= director_transport(s.v, s.u, cfg);
  return r;
}

/// The same right-hand side assembled term by term:
///   d_a(W_{p_a^i} - u^k u^i W_{p_a^k}) - W_{u^i} + W_{u^k} u^k u^i
///   + W_{p_a^k} d_a u^k u^i + W_{p_a^k} u^k d_a u^i - (v.grad) u^i.
/// Agrees with director_rhs up to dealiasing of the individual products.
inline VectorField director_rhs_termwise(const FlowState& s, const FrankConstants& k,
                                         const SchemeConfig& cfg = {}) {
  require_unit_director(s.u);
  const auto e = detail::elastic_fields(s.u, k, cfg.diff);
  const Grid& g = s.grid();
  TensorField flux(g);
  VectorField lower(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 z = s.u.at(i);
    const Mat3 wp = e.wp.at(i);
    const Mat3 gu = e.grad.at(i);
    const Vec3 wu = e.wu.at(i);
    Mat3 f{};
    double wp_g = 0.0;
    Vec3 r{};
    for (int a = 0; a < 3; ++a) {
      const double zw = dot(z, wp[a]);
      wp_g += dot(wp[a], gu[a]);
      for (int c = 0; c < 3; ++c) {
        f[a][c] = wp[a][c] - z[c] * zw;
        r[c] += zw * gu[a][c];
      }
    }
    const double wz = dot(wu, z);
    for (int c = 0; c < 3; ++c) r[c] += -wu[c] + wz * z[c] + wp_g * z[c];
    flux.set(i, f);
    lower.set(i, r);
  }
  VectorField out = divergence(detail::maybe_dealias(flux, cfg.dealias), cfg.diff);
  out += detail::maybe_dealias(lower, cfg.dealias);
  out -= director_transport(s.v, s.u, cfg);
  return out;
}

/// Zero-mean p with -lap p = d_i d_j (S[j][i] + v^i v^j).
inline PressureField pressure_from_state(const VelocityField& v, const DirectorField& u,
                                         const FrankConstants& k, const SchemeConfig& cfg = {}) {
  require_same_grid(v.grid(), u.grid());
  require_unit_director(u);
  const auto e = detail::elastic_fields(u, k, cfg.diff);
  TensorField f = detail::stress_from(e.grad, e.wp);
  for (std::size_t i = 0; i < v.points(); ++i) {
    const Vec3 w = v.at(i);
    for (int j = 0; j < 3; ++j)
      for (int c = 0; c < 3; ++c) f(3 * j + c, i) += w[j] * w[c];
  }
  f = detail::maybe_dealias(std::move(f), cfg.dealias);
  return poisson_solve_zero_mean(divergence(divergence(f, cfg.diff), cfg.diff));
}

inline PressureField pressure_from_state(const FlowState& s, const FrankConstants& k,
                                         const SchemeConfig& cfg = {}) {
  return pressure_from_state(s.v, s.u, k, cfg);
}

/// lap v - (v.grad) v - div S, without the pressure gradient.
inline VectorField momentum_rhs_unprojected(const VelocityField& v, const DirectorField& u,
                                            const FrankConstants& k, const SchemeConfig& cfg) {
  VectorField r = laplacian(v, cfg.diff);
  r -= detail::maybe_dealias(detail::advect(v, gradient(v, cfg.diff)), cfg.dealias);
  r -= divergence(elastic_stress(u, k, cfg), cfg.diff);
  return r;
}

/// lap v - (v.grad) v - grad p - div S, using the state's pressure.
inline VectorField momentum_rhs(const FlowState& s, const FrankConstants& k, const SchemeConfig& cfg = {}) {
  VectorField r = momentum_rhs_unprojected(s.v, s.u, k, cfg);
  r -= gradient(s.p, cfg.diff);
  return r;
}

/// State with the pressure recomputed from (v, u).
inline FlowState make_state(VelocityField v, DirectorField u, const FrankConstants& k, double t = 0.0,
                            const SchemeConfig& cfg = {}) {
  PressureField p = pressure_from_state(v, u, k, cfg);
  return FlowState(std::move(v), std::move(u), std::move(p), t);
}

// ---------------------------------------------------------------------------
// Time stepping.

/// Largest stable step before the cfl factor: min of the advective limit
/// h / max|v| and a diffusive limit for the explicit remainder.
inline double stability_limit(const FlowState& s, const FrankConstants& k, Scheme scheme) {
  const double h = s.grid().spacing();
  const double vmax = std::max(max_abs(s.v), 1e-8);
  const double kmax = std::max({k.k1(), k.k2(), k.k3()});
  const double diffusive = scheme == Scheme::imex_a_split ? h * h * k.a() / (4.0 * kmax)
                                                          : h * h / (32.0 * std::max(1.0, kmax));
  return std::min(h / vmax, diffusive);
}

inline double time_step_size(const FlowState& s, const FrankConstants& k, const SchemeConfig& cfg) {
  cfg.validate();
  const double limit = stability_limit(s, k, cfg.scheme);
  if (!cfg.dt) return cfg.cfl * limit;
  if (cfg.enforce_cfl && *cfg.dt > limit) throw CflViolation(*cfg.dt, limit);
  return *cfg.dt;
}

namespace detail {

inline void require_finite(const FlowState& s) {
  if (!s.v.all_finite() || !s.u.all_finite() || !s.p.all_finite())
    throw BlowupDetected(s.t, "non-finite value in state");
}

inline FlowState finish_step(const FlowState& s, VelocityField v, DirectorField u, double dt,
                             const FrankConstants& k, const SchemeConfig& cfg, StepReport* report) {
  FlowState out(s.grid());
  out.t = s.t + dt;
  out.steps = s.steps + 1;
  if (!v.all_finite() || !u.all_finite()) throw BlowupDetected(out.t, "non-finite value in state");
  const double drift = max_unit_drift(u);
  if (out.steps % cfg.renormalize_every == 0) renormalize(u);
  out.p = pressure_from_state(v, u, k, cfg);
  out.v = std::move(v);
  out.u = std::move(u);
  require_finite(out);
  if (report) {
    report->dt = dt;
    report->max_unit_drift = drift;
    report->div_v_inf = max_abs(divergence(out.v));
  }
  return out;
}

inline FlowState imex_step(const FlowState& s, double dt, const FrankConstants& k, const SchemeConfig& cfg,
                           StepReport* report) {
  // Director: (I - dt a lap)(u_new - u) = dt rhs, the increment form of
  // (I - dt a lap) u_new = u + dt (rhs - a lap u). The smoothed increment is
  // projected back onto the tangent plane, so the norm drift is second order.
  VectorField du = director_rhs(s, k, cfg);
  du *= dt;
  du = helmholtz_inverse(du, dt * k.a());
  project_to_tangent(s.u, du);
  DirectorField u = s.u + du;

  // Velocity: (I - dt lap) v* = v + dt (explicit terms), then projection.
  // The pressure gradient is omitted since the projection removes it.
  VectorField w = detail::maybe_dealias(detail::advect(s.v, gradient(s.v, cfg.diff)), cfg.dealias);
  w += divergence(elastic_stress(s.u, k, cfg), cfg.diff);
  VectorField v = s.v;
  v.axpy(-dt, w);
  v = leray_project(helmholtz_inverse(v, dt));
  return finish_step(s, std::move(v), std::move(u), dt, k, cfg, report);
}

inline FlowState rk2_step(const FlowState& s, double dt, const FrankConstants& k, const SchemeConfig& cfg,
                          StepReport* report) {
  FlowState mid(s.grid());
  mid.u = s.u;
  mid.u.axpy(0.5 * dt, director_rhs(s, k, cfg));
  renormalize(mid.u);
  mid.v = s.v;
  mid.v.axpy(0.5 * dt, momentum_rhs_unprojected(s.v, s.u, k, cfg));
  mid.v = leray_project(mid.v);

  DirectorField u = s.u;
  u.axpy(dt, director_rhs(mid, k, cfg));
  VectorField v = s.v;
  v.axpy(dt, momentum_rhs_unprojected(mid.v, mid.u, k, cfg));
  v = leray_project(v);
  return finish_step(s, std::move(v), std::move(u), dt, k, cfg, report);
}

}  // namespace detail

/// Advances the state by one step of the configured scheme. Throws
/// CflViolation for a fixed dt above the stability limit and BlowupDetected
/// on any non-finite value.
inline FlowState step(const FlowState& s, const SchemeConfig& cfg, const FrankConstants& k,
                      StepReport* report = nullptr) {
  detail::require_finite(s);
  require_unit_director(s.u);
  const double dt = time_step_size(s, k, cfg);
  return cfg.scheme == Scheme::imex_a_split ? detail::imex_step(s, dt, k, cfg, report)
                                            : detail::rk2_step(s, dt, k, cfg, report);
}

/// One step of the constrained elastic gradient flow (the v = 0 director
/// equation) with the same a-split, followed by renormalization.
inline DirectorField gradient_flow_step(const DirectorField& u, double dt, const FrankConstants& k,
                                        const SchemeConfig& cfg = {}, StepReport* report = nullptr) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  VectorField du = director_rhs_elastic(u, k, cfg);
  du *= dt;
  du = helmholtz_inverse(du, dt * k.a());
  project_to_tangent(u, du);
  DirectorField out = u + du;
  if (!out.all_finite()) throw BlowupDetected(0.0, "non-finite director in gradient flow");
  if (report) *report = {dt, max_unit_drift(out), 0.0};
  renormalize(out);
  return out;
}

}  // namespace elof
