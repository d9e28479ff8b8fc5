#include <gtest/gtest.h>

#include <cmath>

#include "elof/frank_energy.hpp"
#include "test_support.hpp"

using namespace elof;
using elof::testing::Sampler;
using elof::testing::max_abs_entry;

namespace {

// Analytic gradient of the twist field u = (cos tz, sin tz, 0) at height z.
std::pair<Vec3, Mat3> twist_at(double tau, double z) {
  const Vec3 u{std::cos(tau * z), std::sin(tau * z), 0.0};
  Mat3 g{};
  g[2][0] = -tau * std::sin(tau * z);
  g[2][1] = tau * std::cos(tau * z);
  return {u, g};
}

// Density rewritten with |G|^2 = tr(G^2) + |curl|^2:
// W = (k2+k4)|G|^2 + (k1-k2-k4) d^2 - k4 (u.c)^2 + (k3-k2-k4) |u x c|^2 for unit u.
double expanded_density(const Vec3& u, const Mat3& g, const FrankConstants& k) {
  double d = 0.0;
  for (int a = 0; a < 3; ++a) d += g[a][a];
  const Vec3 c{g[1][2] - g[2][1], g[2][0] - g[0][2], g[0][1] - g[1][0]};
  const double uc = u[0] * c[0] + u[1] * c[1] + u[2] * c[2];
  const double cc = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
  double gg = 0.0;
  for (const auto& r : g)
    for (double x : r) gg += x * x;
  const double s = k.k2() + k.k4();
  return s * gg + (k.k1() - s) * d * d - k.k4() * uc * uc + (k.k3() - s) * (cc - uc * uc);
}

}  // namespace

TEST(ValidateConstants, EqualConstantsAccepted) {
  const auto k = validate_constants(1, 1, 1, 0);
  EXPECT_EQ(k.a(), 1.0);
}

TEST(ValidateConstants, NamesFailedInequality) {
  try {
    validate_constants(1, 1, 1, 1);
    FAIL() << "expected EricksenViolation";
  } catch (const EricksenViolation& e) {
    EXPECT_EQ(e.inequality(), "k2>|k4|");
  }
  try {
    // a would be min(2, 1, 1.5) = 1, but 2 k1 = 1 < k2 + k4 = 1.5
    validate_constants(0.5, 2.0, 1.0, -0.5);
    FAIL() << "expected EricksenViolation";
  } catch (const EricksenViolation& e) {
    EXPECT_EQ(e.inequality(), "2k1>=k2+k4");
  }
  EXPECT_THROW(validate_constants(0.0, 1, 1, 0), EricksenViolation);
  EXPECT_THROW(validate_constants(1, 1, -1, 0), EricksenViolation);
  EXPECT_THROW(validate_constants(1, 1, 1, NAN), EricksenViolation);
}

TEST(ValidateConstants, EllipticityConstantIsMinimum) {
  const auto k = validate_constants(2.0, 1.5, 0.8, -0.9);
  EXPECT_DOUBLE_EQ(k.a(), std::min({1.5, 0.8, 0.6}));
}

TEST(EnergyDensity, ConstantDirectorHasZeroEnergy) {
  EXPECT_EQ(energy_density({0, 0, 1}, Mat3{}, FrankConstants::equal()), 0.0);
}

TEST(EnergyDensity, PureTwistEnergyIsK2TauSquared) {
  Sampler rng(7);
  for (int s = 0; s < 50; ++s) {
    const auto k = rng.admissible_constants();
    const double tau = rng.uniform(0.2, 3.0);
    const auto [u, g] = twist_at(tau, rng.uniform(0.0, 6.0));
    EXPECT_NEAR(energy_density(u, g, k), k.k2() * tau * tau, 1e-12 * (1 + tau * tau));
  }
}

TEST(EnergyDensity, EqualConstantsGiveFrobeniusNorm) {
  Sampler rng(11);
  const auto k = FrankConstants::equal();
  for (int s = 0; s < 1000; ++s) {
    const Vec3 u = rng.unit_vector();
    const Mat3 g = rng.matrix();
    EXPECT_NEAR(energy_density(u, g, k), frobenius_sq(g), 1e-12 * (1 + frobenius_sq(g)));
  }
}

TEST(EnergyDensity, MatchesExpandedForm) {
  Sampler rng(12);
  for (int s = 0; s < 1000; ++s) {
    const auto k = rng.admissible_constants();
    const Vec3 u = rng.unit_vector();
    const Mat3 g = rng.matrix();
    EXPECT_NEAR(energy_density(u, g, k), expanded_density(u, g, k), 1e-11 * (1 + frobenius_sq(g)));
  }
}

TEST(EnergyDensity, MatchesGeometricFormOnUnitSphere) {
  Sampler rng(19);
  for (int s = 0; s < 1000; ++s) {
    const auto k = rng.admissible_constants();
    const Vec3 u = rng.unit_vector();
    const Mat3 g = rng.matrix();
    const double d = g[0][0] + g[1][1] + g[2][2];
    const Vec3 c = curl_of(g);
    const Vec3 b = cross(u, c);
    const double geometric = k.k1() * d * d + k.k2() * dot(u, c) * dot(u, c) + k.k3() * dot(b, b) +
                             (k.k2() + k.k4()) * (trace_of_square(g) - d * d);
    EXPECT_NEAR(energy_density(u, g, k), geometric, 1e-11 * (1 + frobenius_sq(g)));
  }
}

TEST(EnergyDensity, RejectsNonUnitDirector) {
  EXPECT_THROW(energy_density({0, 0, 1.0 + 1e-6}, Mat3{}, FrankConstants::equal()), NonUnitDirector);
  EXPECT_THROW(energy_density({0, 0, 0}, Mat3{}, FrankConstants::equal()), NonUnitDirector);
  EXPECT_THROW(energy_density({NAN, 0, 1}, Mat3{}, FrankConstants::equal()), NonUnitDirector);
  EXPECT_NO_THROW(energy_density({0, 0, 1.0 + 5e-9}, Mat3{}, FrankConstants::equal()));
}

TEST(PointwiseIdentities, GradientSplitsIntoTraceAndCurl) {
  Sampler rng(3);
  for (int s = 0; s < 1000; ++s) {
    const Mat3 g = rng.matrix();
    const Vec3 c = curl_of(g);
    EXPECT_NEAR(frobenius_sq(g), trace_of_square(g) + dot(c, c), 1e-12 * (1 + frobenius_sq(g)));
    const Vec3 u = rng.unit_vector();
    const Vec3 uxc = cross(u, c);
    EXPECT_NEAR(dot(c, c), dot(u, c) * dot(u, c) + dot(uxc, uxc), 1e-12 * (1 + dot(c, c)));
  }
}

TEST(Derivatives, VanishAtZeroGradient) {
  Sampler rng(4);
  const auto k = rng.admissible_constants();
  const Vec3 u = rng.unit_vector();
  EXPECT_EQ(max_abs_entry(dW_dp(u, Mat3{}, k)), 0.0);
  const Vec3 du = dW_du(u, Mat3{}, k);
  EXPECT_EQ(std::abs(du[0]) + std::abs(du[1]) + std::abs(du[2]), 0.0);
}

TEST(Derivatives, MatchCentralFiniteDifferences) {
  Sampler rng(5);
  constexpr double step = 1e-5;
  for (int s = 0; s < 1000; ++s) {
    const auto k = rng.admissible_constants();
    const Vec3 u = rng.unit_vector();
    const Mat3 g = rng.matrix();
    const Mat3 an = dW_dp(u, g, k);
    const Mat3 fd = elof::testing::fd_density_dp(u, g, k, step);
    EXPECT_LE(elof::testing::max_abs_diff(an, fd), 1e-6 * max_abs_entry(an));

    const Vec3 au = dW_du(u, g, k);
    const Vec3 fu = elof::testing::fd_density_du(u, g, k, step);
    const double scale = std::max({std::abs(au[0]), std::abs(au[1]), std::abs(au[2])});
    for (int i = 0; i < 3; ++i) EXPECT_LE(std::abs(au[i] - fu[i]), 1e-6 * scale);
  }
}

TEST(Derivatives, EqualConstantReduction) {
  Sampler rng(6);
  const auto k = FrankConstants::equal();
  for (int s = 0; s < 200; ++s) {
    const Vec3 u = rng.unit_vector();
    const Mat3 g = rng.matrix();
    const Mat3 wp = dW_dp(u, g, k);
    Mat3 twice{};
    for (int a = 0; a < 3; ++a)
      for (int i = 0; i < 3; ++i) twice[a][i] = 2 * g[a][i];
    EXPECT_LE(elof::testing::max_abs_diff(wp, twice), 1e-12 * (1 + max_abs_entry(g)));
    const Vec3 wu = dW_du(u, g, k);
    EXPECT_LE(norm(wu), 1e-12 * (1 + frobenius_sq(g)));
  }
}

TEST(Hessian, EqualConstantsGiveTwiceIdentity) {
  Sampler rng(8);
  const auto h = d2W_dpdp(rng.unit_vector(), FrankConstants::equal());
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 3; ++i)
      for (int b = 0; b < 3; ++b)
        for (int j = 0; j < 3; ++j)
          EXPECT_NEAR(h(a, i, b, j), (a == b && i == j) ? 2.0 : 0.0, 1e-14);
}

TEST(Hessian, ContractionReproducesFirstDerivative) {
  Sampler rng(9);
  for (int s = 0; s < 1000; ++s) {
    const auto k = rng.admissible_constants();
    const Vec3 u = rng.unit_vector();
    const Mat3 g = rng.matrix();
    const Mat3 hg = d2W_dpdp(u, k).contract(g);
    EXPECT_LE(elof::testing::max_abs_diff(hg, dW_dp(u, g, k)), 1e-12 * (1 + max_abs_entry(g)) * k.max_abs());
  }
}

TEST(Hessian, SymmetricBilinearForm) {
  Sampler rng(10);
  const auto k = rng.admissible_constants();
  const auto h = d2W_dpdp(rng.unit_vector(), k);
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 3; ++i)
      for (int b = 0; b < 3; ++b)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(h(a, i, b, j), h(b, j, a, i), 1e-14);
}

// The form equals 2 W(u, xi). Coercivity W >= a|xi|^2 holds whenever
// k4 <= 0, k1 >= k2 + k4 and k3 >= k2 + k4 (then a = k2 + k4 and every other
// term of the expanded density is non-negative).
TEST(Ellipticity, HoldsWhereEveryExpandedCoefficientIsNonNegative) {
  Sampler rng(13);
  int used = 0;
  while (used < 10000) {
    const double k2 = rng.uniform(0.1, 3.0), k4 = -rng.uniform(0.0, 0.99) * k2;
    const double k1 = (k2 + k4) * rng.uniform(1.0, 3.0), k3 = (k2 + k4) * rng.uniform(1.0, 3.0);
    const auto k = validate_constants(k1, k2, k3, k4);
    const Vec3 u = rng.unit_vector();
    const Mat3 xi = rng.matrix();
    EXPECT_GE(energy_density(u, xi, k), k.a() * frobenius_sq(xi) - 1e-10);
    EXPECT_GE(d2W_dpdp(u, k).quadratic_form(xi), k.a() * frobenius_sq(xi) - 1e-10);
    ++used;
  }
}

TEST(Ellipticity, PointwiseBoundFailsForSomeAdmissibleConstants) {
  // 2 k1 = k2 + k4, so the constants are admissible; a = 1.
  const auto k = validate_constants(0.75, 1.0, 1.0, 0.5);
  const Mat3 id = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
  // W(e3, I) = 9 k1 - 6 (k2 + k4)
  EXPECT_NEAR(energy_density({0, 0, 1}, id, k), 9 * 0.75 - 6 * 1.5, 1e-14);
  EXPECT_LT(energy_density({0, 0, 1}, id, k), k.a() * frobenius_sq(id));
}

TEST(QuadraticBounds, HoldWithEightTimesLargestModulus) {
  Sampler rng(14);
  for (int s = 0; s < 10000; ++s) {
    const auto k = rng.admissible_constants();
    const double c = 8.0 * k.max_abs();
    const Vec3 u = rng.unit_vector();
    const Mat3 g = rng.matrix(rng.uniform(0.01, 10.0));
    const double gg = frobenius_sq(g);
    EXPECT_LE(std::abs(energy_density(u, g, k)), c * gg);
    EXPECT_LE(norm(dW_du(u, g, k)), c * gg);
    EXPECT_LE(std::sqrt(frobenius_sq(dW_dp(u, g, k))), c * std::sqrt(gg));
  }
}

TEST(Rotation, IdentityIsNoOp) {
  Sampler rng(15);
  const Vec3 u = rng.unit_vector();
  const Mat3 g = rng.matrix();
  const Mat3 id = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
  const auto [ru, rg] = apply_rotation(u, g, id);
  EXPECT_EQ(ru, u);
  EXPECT_EQ(rg, g);
}

TEST(Rotation, EnergyIsFrameInvariant) {
  Sampler rng(16);
  for (int s = 0; s < 1000; ++s) {
    const auto k = rng.admissible_constants();
    const Vec3 u = rng.unit_vector();
    const Mat3 g = rng.matrix();
    const Mat3 q = rng.rotation();
    const auto [ru, rg] = apply_rotation(u, g, q);
    EXPECT_NEAR(energy_density(ru, rg, k), energy_density(u, g, k), 1e-10 * (1 + frobenius_sq(g)));
  }
}

TEST(Rotation, ConstraintCouplingIsFrameInvariant) {
  Sampler rng(17);
  for (int s = 0; s < 1000; ++s) {
    const auto k = rng.admissible_constants();
    const Vec3 u = rng.unit_vector();
    const Mat3 g = rng.matrix();
    const Mat3 gw = rng.matrix();
    const Mat3 q = rng.rotation();
    const auto [ru, rg] = apply_rotation(u, g, q);
    const Mat3 rgw = apply_rotation(u, gw, q).second;
    const double before = constraint_coupling(u, g, gw, k);
    const double after = constraint_coupling(ru, rg, rgw, k);
    EXPECT_NEAR(after, before, 1e-10 * (1 + frobenius_sq(g) + frobenius_sq(gw)));
  }
}

TEST(Rotation, NorthPoleFrame) {
  Sampler rng(18);
  for (int s = 0; s < 100; ++s) {
    const Vec3 u = rng.unit_vector();
    const auto [ru, rg] = apply_rotation(u, Mat3{}, rotation_to_north_pole(u));
    EXPECT_NEAR(ru[0], 0.0, 1e-12);
    EXPECT_NEAR(ru[1], 0.0, 1e-12);
    EXPECT_NEAR(ru[2], 1.0, 1e-12);
  }
  const auto flip = rotation_to_north_pole({0, 0, -1});
  EXPECT_NEAR(matvec(flip, {0, 0, -1})[2], 1.0, 1e-15);
}

TEST(Rotation, RejectsReflectionsAndNonOrthogonalMaps) {
  const Mat3 reflect = {Vec3{-1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
  EXPECT_THROW(apply_rotation({0, 0, 1}, Mat3{}, reflect), NotARotation);
  const Mat3 shear = {Vec3{1, 0.1, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
  EXPECT_THROW(apply_rotation({0, 0, 1}, Mat3{}, shear), NotARotation);
}
