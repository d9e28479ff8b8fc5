#pragma once

// Scalar diagnostics of flow states and trajectories: energies and
// dissipation, scale-critical local L^3 norms, the parabolic scaling check,
// the local interpolation ratio, the local energy inequality report, the
// uniqueness functional and the blow-up monitor.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "elof/errors.hpp"
#include "elof/frank_energy.hpp"
#include "elof/grid.hpp"
#include "elof/operators.hpp"
#include "elof/solver.hpp"

namespace elof {

// ---------------------------------------------------------------------------
// Energy.

struct EnergyBreakdown {
  double total = 0.0;
  double elastic = 0.0;
  double kinetic = 0.0;
};

/// E_elastic = int W(u, grad u), E_kinetic = 1/2 int |v|^2.
inline EnergyBreakdown total_energy(const FlowState& s, const FrankConstants& k, const SchemeConfig& cfg = {}) {
  require_unit_director(s.u);
  const TensorField g = gradient(s.u, cfg.diff);
  double w = 0.0;
  for (std::size_t i = 0; i < g.points(); ++i) w += raw::density(s.u.at(i), g.at(i), k);
  EnergyBreakdown e;
  e.elastic = w * s.grid().cell_volume();
  e.kinetic = 0.5 * l2_norm_sq(s.v);
  e.total = e.elastic + e.kinetic;
  return e;
}

/// int |grad v|^2 + |R|^2 with R the tangential elastic force (the director
/// velocity u_t + (v.grad) u).
inline double dissipation_rate(const FlowState& s, const FrankConstants& k, const SchemeConfig& cfg = {}) {
  return l2_norm_sq(gradient(s.v, cfg.diff)) + l2_norm_sq(director_rhs_elastic(s.u, k, cfg));
}

struct EnergySample {
  double t;
  double energy;
  double dissipation;
};

/// Accumulates |E(t) + int_0^t D - E(0)| / E(0) with trapezoidal time
/// quadrature; the residual reported is the maximum over the samples so far.
class EnergyBalance {
 public:
  void add(const EnergySample& s) {
    if (!samples_.empty()) {
      const auto& p = samples_.back();
      integral_ += 0.5 * (s.t - p.t) * (s.dissipation + p.dissipation);
    }
    samples_.push_back(s);
    const double e0 = samples_.front().energy;
    const double defect = std::abs(s.energy + integral_ - e0);
    current_ = e0 != 0.0 ? defect / std::abs(e0) : defect;
    max_ = std::max(max_, current_);
  }
  double residual() const noexcept { return max_; }
  double current() const noexcept { return current_; }
  double dissipated() const noexcept { return integral_; }
  std::size_t size() const noexcept { return samples_.size(); }

  /// True when no sample has energy above its predecessor by more than
  /// rel_slack * E(0).
  bool non_increasing(double rel_slack = 0.0) const {
    const double tol = rel_slack * std::abs(samples_.empty() ? 0.0 : samples_.front().energy);
    for (std::size_t i = 1; i < samples_.size(); ++i)
      if (samples_[i].energy > samples_[i - 1].energy + tol) return false;
    return true;
  }

 private:
  std::vector<EnergySample> samples_;
  double integral_ = 0.0;
  double current_ = 0.0;
  double max_ = 0.0;
};

inline double energy_balance_residual(std::span<const EnergySample> window) {
  if (window.size() < 2) throw std::invalid_argument("energy balance needs at least two samples");
  EnergyBalance b;
  for (const auto& s : window) b.add(s);
  return b.residual();
}

// ---------------------------------------------------------------------------
// Local L^3 norms.

namespace detail {

/// max over stride-sampled lattice centers of sum_{offsets} density, times h^3.
inline double max_ball_sum(const ScalarField& density, double radius, int stride) {
  if (stride < 1) throw std::invalid_argument("center stride must be >= 1");
  const Grid& g = density.grid();
  const auto offsets = ball_offsets(g, radius);
  const int n = g.n();
  double best = 0.0;
  for (int k = 0; k < n; k += stride)
    for (int j = 0; j < n; j += stride)
      for (int i = 0; i < n; i += stride) {
        double s = 0.0;
        for (const auto& o : offsets) s += density[g.index(i + o.dx, j + o.dy, k + o.dz)];
        if (!(s <= best)) best = s;  // NaN propagates
      }
  return best * g.cell_volume();
}

template <int Rank>
ScalarField cube_of_magnitude(const Field<Rank>& f) {
  ScalarField out(f.grid());
  for (std::size_t i = 0; i < f.points(); ++i) {
    const double m = std::sqrt(f.magnitude_sq(i));
    out[i] = m * m * m;
  }
  return out;
}

}  // namespace detail

/// sup over centers (every stride-th node per axis) of ||f||_{L^3(B_R(x))}.
template <int Rank>
double l3_uloc(const Field<Rank>& f, double radius, int center_stride = 1) {
  return std::cbrt(detail::max_ball_sum(detail::cube_of_magnitude(f), radius, center_stride));
}

/// sup over centers of (int_{B_R(x)} |v|^3 + |grad u|^3)^(1/3).
inline double l3_uloc_pair(const VectorField& v, const TensorField& grad_u, double radius,
                           int center_stride = 1) {
  require_same_grid(v.grid(), grad_u.grid());
  ScalarField d = detail::cube_of_magnitude(v);
  d += detail::cube_of_magnitude(grad_u);
  return std::cbrt(detail::max_ball_sum(d, radius, center_stride));
}

// ---------------------------------------------------------------------------
// Parabolic scaling.

inline constexpr int kMaxScalingResolution = 64;

/// Periodic extension of f to lambda^3 copies on a grid of lambda N points
/// over the same box: out(x) = f(lambda x).
template <int Rank>
Field<Rank> tile(const Field<Rank>& f, int lambda) {
  const Grid& g = f.grid();
  const Grid fine(g.n() * lambda, g.length());
  Field<Rank> out(fine);
  const int m = fine.n();
  for (int c = 0; c < Field<Rank>::components; ++c)
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) out(c, fine.index(i, j, k)) = f(c, g.index(i, j, k));
  return out;
}

/// (v, u, p) -> (lambda v(lambda x), u(lambda x), lambda^2 p(lambda x)), time
/// scaled by lambda^-2.
inline FlowState rescale_state(const FlowState& s, int lambda) {
  if (lambda < 1 || (lambda & (lambda - 1)) != 0)
    throw std::invalid_argument("scaling factor must be a power of two");
  if (s.grid().n() * lambda > kMaxScalingResolution)
    throw ResolutionExceeded("rescaled grid of " + std::to_string(s.grid().n() * lambda) +
                             " points exceeds the limit of " + std::to_string(kMaxScalingResolution));
  const double l = lambda;
  FlowState out(tile(s.v, lambda), tile(s.u, lambda), tile(s.p, lambda), s.t / (l * l));
  out.v *= l;
  out.p *= l * l;
  out.steps = s.steps;
  return out;
}

struct ScalingReport {
  int lambda = 1;
  double norm_cubed = 0.0;          // sup_x ||(v, grad u)||^3_{L^3(B_R(x))}
  double rescaled_norm_cubed = 0.0; // same on balls of radius R / lambda
  double relative_gap = 0.0;
  double step_gap = 0.0;            // rescaled step vs rescaled-then-stepped, relative
};

/// Compares the critical ball norm of a state with that of its lambda-rescaled
/// copy, and, when step_dt > 0, one step of size dt on the original with one
/// step of size dt / lambda^2 on the rescaled copy.
inline ScalingReport scaling_check(const FlowState& s, int lambda, double radius, const FrankConstants& k,
                                   int center_stride = 1, double step_dt = 0.0, SchemeConfig cfg = {}) {
  ScalingReport r;
  r.lambda = lambda;
  const FlowState big = rescale_state(s, lambda);
  const double a = l3_uloc_pair(s.v, gradient(s.u, cfg.diff), radius, center_stride);
  const double b = l3_uloc_pair(big.v, gradient(big.u, cfg.diff), radius / lambda, center_stride);
  r.norm_cubed = a * a * a;
  r.rescaled_norm_cubed = b * b * b;
  r.relative_gap = r.norm_cubed > 0.0 ? std::abs(r.rescaled_norm_cubed - r.norm_cubed) / r.norm_cubed
                                      : std::abs(r.rescaled_norm_cubed);
  if (step_dt > 0.0) {
    cfg.enforce_cfl = false;
    cfg.dt = step_dt;
    const FlowState stepped = rescale_state(step(s, cfg, k), lambda);
    cfg.dt = step_dt / (lambda * lambda);
    const FlowState direct = step(big, cfg, k);
    const double scale = std::max({max_abs(stepped.v), max_abs(stepped.u), 1e-300});
    double gap = 0.0;
    for (std::size_t i = 0; i < direct.v.data().size(); ++i) {
      gap = std::max(gap, std::abs(direct.v.data()[i] - stepped.v.data()[i]));
      gap = std::max(gap, std::abs(direct.u.data()[i] - stepped.u.data()[i]));
    }
    r.step_gap = gap / scale;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Interpolation ratio on a ball.

struct InterpolationTerms {
  double cubic = 0.0;     // int_B |f|^3
  double mass = 0.0;      // r^-1 int_B |f|^2
  double gradient = 0.0;  // r int_B |grad f|^2
  double ratio = 0.0;     // cubic / (mass^(3/4) gradient^(3/4) + mass^(3/2)), 0/0 := 0
};

template <int Rank>
InterpolationTerms interpolation_terms(const Field<Rank>& f, const Field<Rank + 1>& grad_f, const Ball& ball) {
  const double h3 = f.grid().cell_volume();
  double c3 = 0.0, c2 = 0.0, g2 = 0.0;
  for (std::size_t idx : ball_nodes(f.grid(), ball)) {
    const double m2 = f.magnitude_sq(idx);
    c3 += m2 * std::sqrt(m2);
    c2 += m2;
    g2 += grad_f.magnitude_sq(idx);
  }
  InterpolationTerms t;
  const double r = ball.radius;
  t.cubic = c3 * h3;
  t.mass = c2 * h3 / r;
  t.gradient = g2 * h3 * r;
  const double denom = std::pow(t.mass, 0.75) * std::pow(t.gradient, 0.75) + std::pow(t.mass, 1.5);
  t.ratio = denom > 0.0 ? t.cubic / denom : 0.0;
  return t;
}

/// int_B |f|^3 divided by the right-hand side of the local interpolation
/// inequality with unit constant.
template <int Rank>
double interpolation_ratio(const Field<Rank>& f, const Ball& ball, DiffMode mode = DiffMode::spectral) {
  return interpolation_terms(f, gradient(f, mode), ball).ratio;
}

/// Largest ratio for f = v and f = grad u over stride-sampled lattice centers.
inline double interpolation_ratio_max(const FlowState& s, double radius, int center_stride,
                                      DiffMode mode = DiffMode::spectral) {
  const Grid& g = s.grid();
  require_ball_fits(g, radius);
  const TensorField gv = gradient(s.v, mode);
  const TensorField gu = gradient(s.u, mode);
  const Tensor3Field ggu = gradient(gu, mode);
  double best = 0.0;
  for (int k = 0; k < g.n(); k += center_stride)
    for (int j = 0; j < g.n(); j += center_stride)
      for (int i = 0; i < g.n(); i += center_stride) {
        const Ball b{{g.coordinate(i), g.coordinate(j), g.coordinate(k)}, radius};
        best = std::max(best, interpolation_terms(s.v, gv, b).ratio);
        best = std::max(best, interpolation_terms(gu, ggu, b).ratio);
      }
  return best;
}

// ---------------------------------------------------------------------------
// Local energy inequality.

/// Quartic bump (1 - (rho/w)^2)^2 for rho < w, zero outside; rho is the
/// periodic distance to the center.
inline ScalarField quartic_cutoff(const Grid& g, const Vec3& center, double width) {
  require_ball_fits(g, width);
  ScalarField phi(g);
  const double l = g.length();
  auto periodic = [l](double d) { return d - l * std::round(d / l); };
  for (int k = 0; k < g.n(); ++k)
    for (int j = 0; j < g.n(); ++j)
      for (int i = 0; i < g.n(); ++i) {
        const double dx = periodic(g.coordinate(i) - center[0]);
        const double dy = periodic(g.coordinate(j) - center[1]);
        const double dz = periodic(g.coordinate(k) - center[2]);
        const double q = (dx * dx + dy * dy + dz * dz) / (width * width);
        phi[g.index(i, j, k)] = q < 1.0 ? (1.0 - q) * (1.0 - q) : 0.0;
      }
  return phi;
}

/// Analytic gradient of quartic_cutoff: -4 (1 - q) r / w^2 inside the support.
inline VectorField quartic_cutoff_gradient(const Grid& g, const Vec3& center, double width) {
  require_ball_fits(g, width);
  VectorField out(g);
  const double l = g.length();
  auto periodic = [l](double d) { return d - l * std::round(d / l); };
  for (int k = 0; k < g.n(); ++k)
    for (int j = 0; j < g.n(); ++j)
      for (int i = 0; i < g.n(); ++i) {
        const Vec3 r{periodic(g.coordinate(i) - center[0]), periodic(g.coordinate(j) - center[1]),
                     periodic(g.coordinate(k) - center[2])};
        const double q = dot(r, r) / (width * width);
        if (q >= 1.0) continue;
        const double s = -4.0 * (1.0 - q) / (width * width);
        out.set(g.index(i, j, k), {s * r[0], s * r[1], s * r[2]});
      }
  return out;
}

/// Per-sample integrals entering the local energy inequality.
struct LocalEnergySample {
  double t = 0.0;
  double local_energy = 0.0;   // int (|v|^2 + |grad u|^2) phi^2
  double dissipation = 0.0;    // int (|grad v|^2 + a |grad^2 u|^2) phi^2
  double pressure_flux = 0.0;  // int (p - c) v . grad(phi) phi, c = ball average of p
  double quartic = 0.0;        // int (|v|^4 + |grad u|^4) phi^2
  double cutoff_term = 0.0;    // int (|v|^2 + |grad u|^2) |grad phi|^2
};

struct LocalEnergyReport {
  double margin = 0.0;             // min_t (RHS - LHS) with C = constant
  double constant = 0.0;           // fitted C (or the C supplied)
  double cutoff_gradient_sup = 0.0;   // max |grad phi|
  double cutoff_gradient_ratio = 0.0; // int |grad phi|^2 / int phi^2
  double cutoff_term_integral = 0.0;  // int_0^T int (|v|^2 + |grad u|^2) |grad phi|^2
  std::size_t samples = 0;
};

/// Tracks the local energy inequality on one ball along a trajectory:
///   LHS(t) = int (|v|^2+|grad u|^2) phi^2 + int_0^t int (|grad v|^2 + a |grad^2 u|^2) phi^2
///   RHS(t) = int (|v0|^2+|grad u0|^2) phi^2 + 4 int_0^t int (p - c) v . grad(phi) phi
///          + C int_0^t int (|v|^4 + |grad u|^4) phi^2 + C int_0^t int (|v|^2 + |grad u|^2) |grad phi|^2.
class LocalEnergyTracker {
 public:
  LocalEnergyTracker(const Grid& g, const Ball& ball, double cutoff_width, const FrankConstants& k,
                     DiffMode mode = DiffMode::spectral)
      : ball_(ball),
        a_(k.a()),
        mode_(mode),
        phi_(quartic_cutoff(g, ball.center, std::min(cutoff_width, ball.radius))),
        grad_phi_(quartic_cutoff_gradient(g, ball.center, std::min(cutoff_width, ball.radius))),
        nodes_(ball_nodes(g, ball)) {
    if (!(cutoff_width > 0.0)) throw std::invalid_argument("cutoff width must be positive");
  }

  void add(const FlowState& s) {
    const Grid& g = s.grid();
    require_same_grid(g, phi_.grid());
    const TensorField gv = gradient(s.v, mode_);
    const TensorField gu = gradient(s.u, mode_);
    const Tensor3Field hu = gradient(gu, mode_);
    double c = 0.0;
    for (std::size_t idx : nodes_) c += s.p[idx];
    c /= static_cast<double>(nodes_.size());

    LocalEnergySample x;
    x.t = s.t;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const double ph = phi_[idx];
      const Vec3 dphi = grad_phi_.at(idx);
      const double dphi2 = dot(dphi, dphi);
      if (ph == 0.0 && dphi2 == 0.0) continue;
      const double v2 = s.v.magnitude_sq(idx);
      const double g2 = gu.magnitude_sq(idx);
      const double ph2 = ph * ph;
      x.local_energy += (v2 + g2) * ph2;
      x.dissipation += (gv.magnitude_sq(idx) + a_ * hu.magnitude_sq(idx)) * ph2;
      x.pressure_flux += (s.p[idx] - c) * dot(s.v.at(idx), dphi) * ph;
      x.quartic += (v2 * v2 + g2 * g2) * ph2;
      x.cutoff_term += (v2 + g2) * dphi2;
    }
    const double h3 = g.cell_volume();
    x.local_energy *= h3;
    x.dissipation *= h3;
    x.pressure_flux *= h3;
    x.quartic *= h3;
    x.cutoff_term *= h3;
    samples_.push_back(x);
  }

  const std::vector<LocalEnergySample>& samples() const noexcept { return samples_; }

  /// Report with C fitted as the smallest non-negative constant making
  /// RHS - LHS >= 0 at every sample.
  LocalEnergyReport report() const { return evaluate(std::nullopt); }

  /// Report with a prescribed constant.
  LocalEnergyReport report(double constant) const { return evaluate(constant); }

  double cutoff_gradient_sup() const {
    double m = 0.0;
    for (std::size_t i = 0; i < grad_phi_.points(); ++i) m = std::max(m, grad_phi_.magnitude_sq(i));
    return std::sqrt(m);
  }

  double cutoff_gradient_ratio() const {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < phi_.points(); ++i) {
      num += grad_phi_.magnitude_sq(i);
      den += phi_[i] * phi_[i];
    }
    return den > 0.0 ? num / den : 0.0;
  }

 private:
  LocalEnergyReport evaluate(std::optional<double> constant) const {
    LocalEnergyReport r;
    r.samples = samples_.size();
    r.cutoff_gradient_sup = cutoff_gradient_sup();
    r.cutoff_gradient_ratio = cutoff_gradient_ratio();
    if (samples_.empty()) return r;
    // base(t) = RHS - LHS without the C terms; weight(t) = coefficient of C
    std::vector<double> base(samples_.size()), weight(samples_.size());
    double diss = 0.0, flux = 0.0, quart = 0.0, cut = 0.0;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (i > 0) {
        const auto& p = samples_[i - 1];
        const auto& q = samples_[i];
        const double half = 0.5 * (q.t - p.t);
        diss += half * (p.dissipation + q.dissipation);
        flux += half * (p.pressure_flux + q.pressure_flux);
        quart += half * (p.quartic + q.quartic);
        cut += half * (p.cutoff_term + q.cutoff_term);
      }
      base[i] = samples_.front().local_energy - samples_[i].local_energy - diss + 4.0 * flux;
      weight[i] = quart + cut;
    }
    r.cutoff_term_integral = cut;
    double c = 0.0;
    if (constant) {
      c = *constant;
    } else {
      for (std::size_t i = 0; i < base.size(); ++i) {
        if (base[i] >= 0.0) continue;
        c = weight[i] > 0.0 ? std::max(c, -base[i] / weight[i]) : std::numeric_limits<double>::infinity();
      }
    }
    r.constant = c;
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < base.size(); ++i) m = std::min(m, base[i] + c * weight[i]);
    r.margin = m;
    return r;
  }

  Ball ball_;
  double a_;
  DiffMode mode_;
  ScalarField phi_;
  VectorField grad_phi_;
  std::vector<std::size_t> nodes_;
  std::vector<LocalEnergySample> samples_;
};

inline LocalEnergyReport local_energy_report(std::span<const FlowState> trajectory, const Ball& ball,
                                             double cutoff_width, const FrankConstants& k) {
  if (trajectory.empty()) throw std::invalid_argument("empty trajectory");
  LocalEnergyTracker tracker(trajectory.front().grid(), ball, cutoff_width, k);
  for (const auto& s : trajectory) tracker.add(s);
  return tracker.report();
}

// ---------------------------------------------------------------------------
// Uniqueness functional.

struct UniquenessGap {
  double phi = 0.0;  // ||xi||^2 + ||grad xi||^2 + ||w||^2
  double xi_sq = 0.0;
  double grad_xi_sq = 0.0;
  double w_sq = 0.0;
};

/// xi = (I - lap)^{-1}(v1 - v2), w = u1 - u2.
inline UniquenessGap uniqueness_gap(const FlowState& a, const FlowState& b) {
  require_same_grid(a.grid(), b.grid());
  const VectorField xi = helmholtz_inverse(a.v - b.v, 1.0);
  UniquenessGap g;
  g.xi_sq = l2_norm_sq(xi);
  g.grad_xi_sq = l2_norm_sq(gradient(xi));
  g.w_sq = l2_norm_sq(a.u - b.u);
  g.phi = g.xi_sq + g.grad_xi_sq + g.w_sq;
  return g;
}

/// Smallest C with phi(t) <= phi(0) exp(C t) at every sample with t > t0.
inline double fit_growth_rate(std::span<const double> times, std::span<const double> phis) {
  if (times.size() != phis.size() || times.size() < 2)
    throw std::invalid_argument("growth fit needs matching series of length >= 2");
  if (!(phis[0] > 0.0)) throw std::invalid_argument("growth fit needs phi(0) > 0");
  double c = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double dt = times[i] - times[0];
    if (dt <= 0.0) continue;
    c = std::max(c, std::log(phis[i] / phis[0]) / dt);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Blow-up monitor.

struct BlowupVerdict {
  std::vector<double> radii;
  std::vector<double> norms;  // sup_x ||(v, grad u)||_{L^3(B_R(x))}
  std::vector<bool> flagged;
  bool any = false;
};

inline BlowupVerdict blowup_monitor(const FlowState& s, double eps0, std::span<const double> radii,
                                    int center_stride = 1, DiffMode mode = DiffMode::spectral) {
  BlowupVerdict out;
  const TensorField gu = gradient(s.u, mode);
  for (double r : radii) {
    const double n = l3_uloc_pair(s.v, gu, r, center_stride);
    const bool flag = !(n <= eps0);
    out.radii.push_back(r);
    out.norms.push_back(n);
    out.flagged.push_back(flag);
    out.any = out.any || flag;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Row of the diagnostics table.

struct DiagnosticsRecord {
  double t = 0.0;
  double E_total = 0.0;
  double E_elastic = 0.0;
  double E_kinetic = 0.0;
  double dissipation_rate = 0.0;
  double energy_balance_residual = 0.0;
  double l3_uloc_v = 0.0;
  double l3_uloc_gradu = 0.0;
  double max_unit_drift = 0.0;
  double div_v_inf = 0.0;
  double interpolation_ratio_max = 0.0;
  double local_energy_margin = 0.0;

  static constexpr std::array<const char*, 12> columns = {
      "t", "E_total", "E_elastic", "E_kinetic", "dissipation_rate", "energy_balance_residual",
      "l3_uloc_v", "l3_uloc_gradu", "max_unit_drift", "div_v_inf", "interpolation_ratio_max",
      "local_energy_margin"};

  std::array<double, 12> values() const {
    return {t, E_total, E_elastic, E_kinetic, dissipation_rate, energy_balance_residual,
            l3_uloc_v, l3_uloc_gradu, max_unit_drift, div_v_inf, interpolation_ratio_max,
            local_energy_margin};
  }

  static DiagnosticsRecord from_values(const std::array<double, 12>& x) {
    return {x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7], x[8], x[9], x[10], x[11]};
  }

  friend bool operator==(const DiagnosticsRecord&, const DiagnosticsRecord&) = default;
};

}  // namespace elof
