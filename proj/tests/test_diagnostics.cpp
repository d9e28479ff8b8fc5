#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "elof/diagnostics.hpp"
#include "elof/initial_data.hpp"
#include "test_support.hpp"

using namespace elof;
using elof::testing::max_abs_diff;
using elof::testing::sample_field;
using elof::testing::Sampler;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

InitialSpec smooth_spec(std::uint64_t seed, double amplitude, int modes = 1) {
  InitialSpec s;
  s.kind = InitialKind::random_smooth;
  s.amplitude = amplitude;
  s.mode_count = modes;
  s.seed = seed;
  return s;
}

FlowState smooth_state(const Grid& g, std::uint64_t seed, double u_amp, double v_amp, const FrankConstants& k) {
  return make_state(make_velocity(smooth_spec(seed, v_amp), g), make_director(smooth_spec(seed, u_amp), g), k);
}

FlowState equilibrium(const Grid& g, const FrankConstants& k) {
  DirectorField u(g);
  for (std::size_t i = 0; i < u.points(); ++i) u.set(i, {0.0, 0.6, 0.8});
  return make_state(VectorField(g), u, k);
}

double discrete_ball_volume(const Grid& g, double r) {
  return static_cast<double>(ball_offsets(g, r).size()) * g.cell_volume();
}

}  // namespace

TEST(Energy, ConstantStateHasNoEnergy) {
  const Grid g(16, kTwoPi);
  const auto k = validate_constants(1.5, 1.0, 0.7, 0.4);
  const auto e = total_energy(equilibrium(g, k), k);
  EXPECT_EQ(e.total, 0.0);
  EXPECT_EQ(e.elastic, 0.0);
  EXPECT_EQ(e.kinetic, 0.0);
}

TEST(Energy, PureTwistEnergyIsK2TauSquaredTimesVolume) {
  for (double length : {kTwoPi, 3.0}) {
    const Grid g(16, length);
    const auto k = validate_constants(1.5, 1.2, 0.7, 0.4);
    InitialSpec spec;
    spec.kind = InitialKind::twist;
    spec.mode_count = 2;
    FlowState s(g);
    s.u = make_director(spec, g);
    const double tau = g.fundamental() * 2;
    const double expect = k.k2() * tau * tau * std::pow(length, 3);
    EXPECT_NEAR(total_energy(s, k).total, expect, 1e-11 * expect);
  }
}

TEST(Energy, SurfaceTermIsANullLagrangian) {
  const Grid g(16, kTwoPi);
  const FlowState s = smooth_state(g, 1, 0.5, 0.3, FrankConstants::equal());
  const double base = total_energy(s, validate_constants(1.0, 1.0, 1.0, 0.0)).total;
  for (double k4 : {-0.5, 0.5}) {
    const double e = total_energy(s, validate_constants(1.0, 1.0, 1.0, k4)).total;
    EXPECT_LE(std::abs(e - base), 1e-10 * (1.0 + base));
  }
}

TEST(Energy, TotalIsSumOfParts) {
  const Grid g(16, kTwoPi);
  const auto k = validate_constants(1.5, 1.0, 0.7, 0.4);
  const auto e = total_energy(smooth_state(g, 2, 0.3, 0.3, k), k);
  EXPECT_NEAR(e.total, e.elastic + e.kinetic, 1e-12 * e.total);
}

TEST(Dissipation, ZeroAtEquilibriumAndNonNegative) {
  const Grid g(16, kTwoPi);
  const auto k = validate_constants(1.5, 1.0, 0.7, 0.4);
  EXPECT_EQ(dissipation_rate(equilibrium(g, k), k), 0.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) EXPECT_GE(dissipation_rate(smooth_state(g, seed, 0.5, 0.5, k), k), 0.0);
}

TEST(Dissipation, MatchesEnergyDecayOfGradientFlow) {
  const Grid g(16, kTwoPi);
  const auto k = validate_constants(1.5, 1.0, 0.7, 0.4);
  FlowState s(g);
  s.u = make_director(smooth_spec(3, 0.2), g);
  double rel[2];
  for (int r = 0; r < 2; ++r) {
    const double dt = 1e-3 / (1 << r);
    FlowState next = s;
    next.u = gradient_flow_step(s.u, dt, k);
    const double de = (total_energy(next, k).total - total_energy(s, k).total) / dt;
    const double d = dissipation_rate(s, k);
    rel[r] = std::abs(de + d) / d;
  }
  EXPECT_LT(rel[0], 0.05);
  EXPECT_NEAR(rel[0] / rel[1], 2.0, 0.4);
}

TEST(EnergyBalance, EquilibriumHasZeroResidual) {
  std::vector<EnergySample> w{{0.0, 3.0, 0.0}, {0.1, 3.0, 0.0}, {0.2, 3.0, 0.0}};
  EXPECT_EQ(energy_balance_residual(w), 0.0);
  EXPECT_THROW(energy_balance_residual(std::span(w).first(1)), std::invalid_argument);
}

TEST(EnergyBalance, ExactForLinearDecay) {
  // E = 2 - t, D = 1: trapezoid is exact
  std::vector<EnergySample> w;
  for (int i = 0; i <= 10; ++i) w.push_back({0.1 * i, 2.0 - 0.1 * i, 1.0});
  EXPECT_LE(energy_balance_residual(w), 1e-15);
}

TEST(EnergyBalance, SmoothRunResidualShrinksWithTimeStep) {
  const Grid g(16, kTwoPi);
  const auto k = validate_constants(1.2, 1.0, 0.9, 0.2);
  const FlowState s0 = smooth_state(g, 4, 0.15, 0.15, k);
  double res[2];
  for (int r = 0; r < 2; ++r) {
    SchemeConfig cfg;
    cfg.dt = 0.0025 / (1 << r);
    FlowState s = s0;
    EnergyBalance b;
    b.add({s.t, total_energy(s, k).total, dissipation_rate(s, k)});
    while (s.t < 0.2 - 1e-12) {
      s = step(s, cfg, k);
      b.add({s.t, total_energy(s, k).total, dissipation_rate(s, k)});
    }
    EXPECT_TRUE(b.non_increasing());
    res[r] = b.residual();
  }
  EXPECT_LT(res[0], 1e-2);
  EXPECT_GT(res[0] / res[1], 1.6);
  EXPECT_LT(res[0] / res[1], 2.4);
}

TEST(L3Uloc, ZeroAndConstantFields) {
  const Grid g(16, kTwoPi);
  EXPECT_EQ(l3_uloc(ScalarField(g), 1.0), 0.0);
  VectorField c(g);
  for (std::size_t i = 0; i < c.points(); ++i) c.set(i, {0.0, 3.0, 4.0});
  for (double r : {0.8, 1.5}) EXPECT_NEAR(l3_uloc(c, r), 5.0 * std::cbrt(discrete_ball_volume(g, r)), 1e-12);
}

TEST(L3Uloc, MonotoneInRadiusAndHomogeneous) {
  const Grid g(16, kTwoPi);
  const VectorField v = make_velocity(smooth_spec(5, 1.0, 2), g);
  double prev = 0.0;
  for (double r : {0.5, 1.0, 1.5, 2.0, 2.5}) {
    const double n = l3_uloc(v, r, 2);
    EXPECT_GE(n, prev);
    prev = n;
  }
  EXPECT_NEAR(l3_uloc(2.5 * v, 1.2, 2), 2.5 * l3_uloc(v, 1.2, 2), 1e-12 * l3_uloc(v, 1.2, 2));
}

TEST(L3Uloc, StrideSamplingIsCloseToAllCenters) {
  const Grid g(16, kTwoPi);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const VectorField v = make_velocity(smooth_spec(seed, 1.0, 1), g);
    const double all = l3_uloc(v, 1.0, 1), sampled = l3_uloc(v, 1.0, 2);
    EXPECT_LE(sampled, all);
    EXPECT_GE(sampled, 0.95 * all);
  }
}

TEST(L3Uloc, RejectsOversizedRadius) {
  const Grid g(16, kTwoPi);
  EXPECT_THROW(l3_uloc(ScalarField(g), 3.2), BallTooLarge);
}

TEST(Scaling, IdentityRescalingIsExact) {
  const Grid g(16, kTwoPi);
  const auto k = FrankConstants::equal();
  const auto r = scaling_check(smooth_state(g, 6, 0.2, 0.2, k), 1, 1.0, k, 2);
  EXPECT_EQ(r.relative_gap, 0.0);
}

TEST(Scaling, CriticalNormAndOneStepAreInvariant) {
  const Grid g(16, kTwoPi);
  const auto k = validate_constants(1.2, 1.0, 0.9, 0.2);
  const FlowState s = smooth_state(g, 7, 0.2, 0.2, k);
  const auto r = scaling_check(s, 2, 1.2, k, 2, 0.004);
  EXPECT_GT(r.norm_cubed, 0.0);
  EXPECT_LE(r.relative_gap, 1e-6);
  EXPECT_LE(r.step_gap, 1e-6);
}

TEST(Scaling, RescalingComposes) {
  const Grid g(16, kTwoPi);
  const auto k = FrankConstants::equal();
  const FlowState s = smooth_state(g, 8, 0.2, 0.2, k);
  const FlowState twice = rescale_state(rescale_state(s, 2), 2);
  const FlowState once = rescale_state(s, 4);
  EXPECT_EQ(twice.v, once.v);
  EXPECT_EQ(twice.u, once.u);
  EXPECT_EQ(twice.p, once.p);
  const double a = scaling_check(s, 4, 1.2, k, 4).rescaled_norm_cubed;
  const double b = scaling_check(rescale_state(s, 2), 2, 0.6, k, 4).rescaled_norm_cubed;
  EXPECT_NEAR(a, b, 1e-6 * a);
}

TEST(Scaling, RefusesUnaffordableResolution) {
  const Grid g(32, kTwoPi);
  const auto k = FrankConstants::equal();
  EXPECT_THROW(scaling_check(equilibrium(g, k), 4, 1.0, k), ResolutionExceeded);
}

TEST(Interpolation, ZeroFieldGivesZero) {
  const Grid g(16, kTwoPi);
  EXPECT_EQ(interpolation_ratio(ScalarField(g), Ball{{1, 1, 1}, 1.0}), 0.0);
}

TEST(Interpolation, UnitFieldMatchesClosedForm) {
  const Grid g(32, kTwoPi);
  ScalarField one(g);
  for (double& x : one.data()) x = 1.0;
  for (double r : {kTwoPi / 8, kTwoPi / 4}) {
    const Ball b{{g.coordinate(5), g.coordinate(7), g.coordinate(9)}, r};
    const double vol = static_cast<double>(ball_nodes(g, b).size()) * g.cell_volume();
    // only the mass term survives: V / (V / r)^(3/2)
    EXPECT_NEAR(interpolation_ratio(one, b), std::pow(r, 1.5) / std::sqrt(vol), 1e-12);
  }
}

TEST(LocalEnergy, CutoffGradientIsBoundedAndMonotoneInWidth) {
  const Grid g(32, kTwoPi);
  const Vec3 c{3.0, 3.0, 3.0};
  double prev_sup = 0.0, prev_ratio = 0.0;
  for (double w : {2.5, 2.0, 1.5, 1.0}) {
    const VectorField gp = quartic_cutoff_gradient(g, c, w);
    double sup = 0.0;
    for (std::size_t i = 0; i < gp.points(); ++i) sup = std::max(sup, std::sqrt(gp.magnitude_sq(i)));
    EXPECT_LE(sup, 4.0 / w);
    const auto k = FrankConstants::equal();
    LocalEnergyTracker t(g, Ball{c, 2.5}, w, k);
    EXPECT_DOUBLE_EQ(t.cutoff_gradient_sup(), sup);
    EXPECT_GT(sup, prev_sup);
    EXPECT_GT(t.cutoff_gradient_ratio(), prev_ratio);
    prev_sup = sup;
    prev_ratio = t.cutoff_gradient_ratio();
  }
}

TEST(LocalEnergy, CutoffGradientMatchesSpectralDerivative) {
  const Grid g(64, kTwoPi);
  const Vec3 c{3.0, 3.1, 2.9};
  const ScalarField phi = quartic_cutoff(g, c, 2.0);
  const VectorField fd = gradient(phi, DiffMode::finite_difference);
  const VectorField exact = quartic_cutoff_gradient(g, c, 2.0);
  // second derivative jumps at the edge of the support; compare inside it
  double err = 0.0;
  for (int k = 0; k < g.n(); ++k)
    for (int j = 0; j < g.n(); ++j)
      for (int i = 0; i < g.n(); ++i) {
        const double dx = g.coordinate(i) - c[0], dy = g.coordinate(j) - c[1], dz = g.coordinate(k) - c[2];
        if (dx * dx + dy * dy + dz * dz > 1.6 * 1.6) continue;
        const std::size_t n = g.index(i, j, k);
        for (int a = 0; a < 3; ++a) err = std::max(err, std::abs(fd(a, n) - exact(a, n)));
      }
  EXPECT_LE(err, 5e-3);
}

TEST(LocalEnergy, EquilibriumHasZeroMargin) {
  const Grid g(16, kTwoPi);
  const auto k = FrankConstants::equal();
  const FlowState s = equilibrium(g, k);
  std::vector<FlowState> traj{s, s, s};
  traj[1].t = 0.1;
  traj[2].t = 0.2;
  const auto r = local_energy_report(traj, Ball{{3, 3, 3}, 2.0}, 2.0, k);
  EXPECT_EQ(r.margin, 0.0);
  EXPECT_EQ(r.constant, 0.0);
}

TEST(LocalEnergy, SmoothRunHasModestFittedConstant) {
  const Grid g(16, kTwoPi);
  const auto k = validate_constants(1.2, 1.0, 0.9, 0.2);
  FlowState s = smooth_state(g, 9, 0.3, 0.3, k);
  LocalEnergyTracker tracker(g, Ball{{3, 3, 3}, 2.5}, 2.5, k);
  tracker.add(s);
  for (int n = 0; n < 30; ++n) {
    s = step(s, SchemeConfig{}, k);
    tracker.add(s);
  }
  const auto r = tracker.report();
  EXPECT_GE(r.margin, -1e-12);
  EXPECT_LE(r.constant, 100.0);
  EXPECT_GE(tracker.report(r.constant + 1.0).margin, r.margin);
}

TEST(Uniqueness, IdenticalStatesGiveZeroAndGapIsSymmetric) {
  const Grid g(16, kTwoPi);
  const auto k = FrankConstants::equal();
  const FlowState a = smooth_state(g, 10, 0.2, 0.2, k);
  const FlowState b = smooth_state(g, 11, 0.2, 0.2, k);
  EXPECT_EQ(uniqueness_gap(a, a).phi, 0.0);
  EXPECT_EQ(uniqueness_gap(a, b).phi, uniqueness_gap(b, a).phi);
  EXPECT_GT(uniqueness_gap(a, b).phi, 0.0);
  EXPECT_THROW(uniqueness_gap(a, FlowState(Grid(8, kTwoPi))), GridMismatch);
}

TEST(Uniqueness, SingleModeClosedForm) {
  const Grid g(16, kTwoPi);
  const double delta = 1e-3;
  FlowState a(g), b(g);
  b.v = sample_field<1>(g, [delta](double x, double y, double) {
    return std::array<double, 3>{0.0, 0.0, delta * std::sin(2 * x + y)};
  });
  const double k2 = 5.0, vol = std::pow(kTwoPi, 3);
  EXPECT_NEAR(uniqueness_gap(a, b).phi, delta * delta * vol / (2.0 * (1.0 + k2)), 1e-15);
}

TEST(Uniqueness, GrowthRateFit) {
  const std::vector<double> t{0.0, 0.1, 0.2}, phi{1.0, std::exp(0.3), std::exp(0.4)};
  EXPECT_NEAR(fit_growth_rate(t, phi), 3.0, 1e-12);
}

TEST(Blowup, ZeroStateRaisesNoFlag) {
  const Grid g(16, kTwoPi);
  const std::vector<double> radii{0.5, 1.0};
  EXPECT_FALSE(blowup_monitor(FlowState(g), 1e-3, radii).any);
}

TEST(Blowup, ConstantFlowFlagsWhenNormCrossesThreshold) {
  const Grid g(16, kTwoPi);
  FlowState s(g);
  for (std::size_t i = 0; i < s.u.points(); ++i) s.u.set(i, {0, 0, 1});
  for (std::size_t i = 0; i < s.v.points(); ++i) s.v.set(i, {0.5, 0.0, 0.0});
  const std::vector<double> radii{0.5, 1.0, 2.0};
  const auto first = blowup_monitor(s, 1.0, radii, 4);
  for (std::size_t j = 0; j < radii.size(); ++j) {
    const double expect = 0.5 * std::cbrt(discrete_ball_volume(g, radii[j]));
    EXPECT_NEAR(first.norms[j], expect, 1e-13);
    const auto below = blowup_monitor(s, expect * (1 + 1e-9), std::span(radii).subspan(j, 1), 4);
    const auto above = blowup_monitor(s, expect * (1 - 1e-9), std::span(radii).subspan(j, 1), 4);
    EXPECT_FALSE(below.any);
    EXPECT_TRUE(above.any);
  }
}

TEST(Record, ValuesRoundTrip) {
  DiagnosticsRecord r{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  EXPECT_EQ(DiagnosticsRecord::from_values(r.values()), r);
  EXPECT_EQ(std::string(DiagnosticsRecord::columns.front()), "t");
}
