#pragma once

// Oseen-Frank elastic energy density and its derivatives.
//
// The density is evaluated from its geometric form
//
//   W(u, G) = k1 (div u)^2 + k2 (u . curl u)^2 + k3 |u x curl u|^2
//           + (k2 + k4) (tr(G^2) - (div u)^2)
//
// with the gradient slot stored as G[alpha][i] = d_alpha u^i (row = spatial
// direction, column = component). The `raw` namespace holds the polynomial
// W(z, p) for arbitrary z in R^3; the checked entry points additionally
// require |u| = 1 to within a tolerance.

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "elof/errors.hpp"

namespace elof {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

/// Gradient slot of W: entry [alpha][i] is d_alpha u^i.
using PointwiseGradient = Mat3;

/// Fourth-order coefficient array H[alpha][i][beta][j] = W_{p_alpha^i p_beta^j}.
class Rank4 {
 public:
  double& operator()(int alpha, int i, int beta, int j) { return c_[offset(alpha, i, beta, j)]; }
  double operator()(int alpha, int i, int beta, int j) const {
    return c_[offset(alpha, i, beta, j)];
  }

  /// Sum over (beta, j) of H[alpha][i][beta][j] * g[beta][j].
  Mat3 contract(const Mat3& g) const {
    Mat3 out{};
    for (int alpha = 0; alpha < 3; ++alpha)
      for (int i = 0; i < 3; ++i) {
        double s = 0.0;
        for (int beta = 0; beta < 3; ++beta)
          for (int j = 0; j < 3; ++j) s += (*this)(alpha, i, beta, j) * g[beta][j];
        out[alpha][i] = s;
      }
    return out;
  }

  /// xi : H : xi
  double quadratic_form(const Mat3& xi) const {
    const Mat3 h = contract(xi);
    double s = 0.0;
    for (int alpha = 0; alpha < 3; ++alpha)
      for (int i = 0; i < 3; ++i) s += xi[alpha][i] * h[alpha][i];
    return s;
  }

 private:
  static constexpr int offset(int alpha, int i, int beta, int j) {
    return ((alpha * 3 + i) * 3 + beta) * 3 + j;
  }
  std::array<double, 81> c_{};
};

inline constexpr double kUnitTolerance = 1e-8;

class FrankConstants;
FrankConstants validate_constants(double k1, double k2, double k3, double k4);

/// Frank elastic moduli satisfying Ericksen's inequalities, plus the derived
/// ellipticity constant a = min(k2, k3, k2 + k4). Only constructible through
/// validate_constants().
class FrankConstants {
 public:
  double k1() const noexcept { return k1_; }
  double k2() const noexcept { return k2_; }
  double k3() const noexcept { return k3_; }
  double k4() const noexcept { return k4_; }
  double a() const noexcept { return a_; }
  double max_abs() const noexcept {
    return std::max({std::abs(k1_), std::abs(k2_), std::abs(k3_), std::abs(k4_)});
  }

  /// k = (1, 1, 1, 0): W = |grad u|^2.
  static FrankConstants equal() { return validate_constants(1.0, 1.0, 1.0, 0.0); }

  friend bool operator==(const FrankConstants&, const FrankConstants&) = default;

 private:
  friend FrankConstants validate_constants(double, double, double, double);
  FrankConstants(double k1, double k2, double k3, double k4)
      : k1_(k1), k2_(k2), k3_(k3), k4_(k4), a_(std::min({k2, k3, k2 + k4})) {}

  double k1_, k2_, k3_, k4_, a_;
};

inline FrankConstants validate_constants(double k1, double k2, double k3, double k4) {
  if (!std::isfinite(k1) || !std::isfinite(k2) || !std::isfinite(k3) || !std::isfinite(k4))
    throw EricksenViolation("finite constants");
  if (!(k1 > 0.0)) throw EricksenViolation("k1>0");
  if (!(k2 > std::abs(k4))) throw EricksenViolation("k2>|k4|");
  if (!(k3 > 0.0)) throw EricksenViolation("k3>0");
  if (!(2.0 * k1 >= k2 + k4)) throw EricksenViolation("2k1>=k2+k4");
  return FrankConstants(k1, k2, k3, k4);
}

// ---------------------------------------------------------------------------
// Small dense helpers.

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline double frobenius_sq(const Mat3& g) {
  double s = 0.0;
  for (const auto& row : g)
    for (double x : row) s += x * x;
  return s;
}

inline double trace(const Mat3& g) { return g[0][0] + g[1][1] + g[2][2]; }

/// tr(G^2) = sum G[alpha][i] G[i][alpha]
inline double trace_of_square(const Mat3& g) {
  double s = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 3; ++i) s += g[a][i] * g[i][a];
  return s;
}

/// curl_i = eps_{i alpha beta} G[alpha][beta]
inline Vec3 curl_of(const Mat3& g) {
  return {g[1][2] - g[2][1], g[2][0] - g[0][2], g[0][1] - g[1][0]};
}

/// Matrix with entries sum_m q_m eps_{m alpha i}.
inline Mat3 levi_civita_of(const Vec3& q) {
  Mat3 e{};
  e[0][1] = q[2];
  e[1][0] = -q[2];
  e[1][2] = q[0];
  e[2][1] = -q[0];
  e[2][0] = q[1];
  e[0][2] = -q[1];
  return e;
}

inline Mat3 transpose(const Mat3& g) {
  Mat3 t{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) t[a][b] = g[b][a];
  return t;
}

inline Mat3 matmul(const Mat3& x, const Mat3& y) {
  Mat3 r{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      double s = 0.0;
      for (int c = 0; c < 3; ++c) s += x[a][c] * y[c][b];
      r[a][b] = s;
    }
  return r;
}

inline Vec3 matvec(const Mat3& m, const Vec3& v) {
  return {dot(m[0], v), dot(m[1], v), dot(m[2], v)};
}

// ---------------------------------------------------------------------------
// Unchecked polynomial W(z, p) and derivatives, valid for every z in R^3.

namespace raw {

// Off the unit sphere, |z x c|^2 is extended as |c|^2 - (z.c)^2. Values and
// tangential derivatives on |z| = 1 are unchanged, and for k2 = k3 the
// density no longer depends on z at all.

inline double density(const Vec3& z, const Mat3& g, const FrankConstants& k) {
  const double d = trace(g);
  const Vec3 c = curl_of(g);
  const double twist = dot(z, c);
  return k.k1() * d * d + (k.k2() - k.k3()) * twist * twist + k.k3() * dot(c, c) +
         (k.k2() + k.k4()) * (trace_of_square(g) - d * d);
}

inline Mat3 density_dp(const Vec3& z, const Mat3& g, const FrankConstants& k) {
  const double d = trace(g);
  const Vec3 c = curl_of(g);
  const double zc = dot(z, c);
  Vec3 q{};
  for (int m = 0; m < 3; ++m) q[m] = 2.0 * (k.k2() - k.k3()) * zc * z[m] + 2.0 * k.k3() * c[m];
  Mat3 out = levi_civita_of(q);
  const double s = k.k2() + k.k4();
  for (int a = 0; a < 3; ++a) {
    for (int i = 0; i < 3; ++i) out[a][i] += 2.0 * s * g[i][a];
    out[a][a] += 2.0 * (k.k1() - s) * d;
  }
  return out;
}

inline Vec3 density_du(const Vec3& z, const Mat3& g, const FrankConstants& k) {
  const Vec3 c = curl_of(g);
  const double zc = dot(z, c);
  Vec3 out{};
  for (int i = 0; i < 3; ++i) out[i] = 2.0 * (k.k2() - k.k3()) * zc * c[i];
  return out;
}

inline Rank4 density_dpdp(const Vec3& z, const FrankConstants& k) {
  const Mat3 e = levi_civita_of(z);  // e[alpha][i] = sum_m z_m eps_{m alpha i}
  const double s = k.k2() + k.k4();
  auto delta = [](int x, int y) { return x == y ? 1.0 : 0.0; };
  Rank4 h;
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 3; ++i)
      for (int b = 0; b < 3; ++b)
        for (int j = 0; j < 3; ++j) {
          // sum_m eps_{m a i} eps_{m b j} = delta_ab delta_ij - delta_aj delta_ib
          const double ee = delta(a, b) * delta(i, j) - delta(a, j) * delta(i, b);
          h(a, i, b, j) = 2.0 * k.k1() * delta(a, i) * delta(b, j) +
                          2.0 * (k.k2() - k.k3()) * e[a][i] * e[b][j] + 2.0 * k.k3() * ee +
                          2.0 * s * (delta(i, b) * delta(a, j) - delta(a, i) * delta(b, j));
        }
  return h;
}

}  // namespace raw

// ---------------------------------------------------------------------------
// Checked entry points.

inline void require_unit(const Vec3& u, double tolerance = kUnitTolerance) {
  const double dev = std::abs(norm(u) - 1.0);
  if (!(dev <= tolerance)) throw NonUnitDirector(dev);
}

inline double energy_density(const Vec3& u, const PointwiseGradient& g, const FrankConstants& k,
                             double tolerance = kUnitTolerance) {
  require_unit(u, tolerance);
  return raw::density(u, g, k);
}

/// W_{p_alpha^i}; linear in G for fixed u.
inline Mat3 dW_dp(const Vec3& u, const PointwiseGradient& g, const FrankConstants& k,
                  double tolerance = kUnitTolerance) {
  require_unit(u, tolerance);
  return raw::density_dp(u, g, k);
}

/// W_{u^i}; quadratic in G.
inline Vec3 dW_du(const Vec3& u, const PointwiseGradient& g, const FrankConstants& k,
                  double tolerance = kUnitTolerance) {
  require_unit(u, tolerance);
  return raw::density_du(u, g, k);
}

/// W_{p p}: constant in p. W is homogeneous quadratic in p, so
/// dW_dp(u, G) == d2W_dpdp(u).contract(G) with no lower-order coupling.
inline Rank4 d2W_dpdp(const Vec3& u, const FrankConstants& k, double tolerance = kUnitTolerance) {
  require_unit(u, tolerance);
  return raw::density_dpdp(u, k);
}

// ---------------------------------------------------------------------------
// Frame rotations.

inline void require_rotation(const Mat3& q, double tolerance = 1e-12) {
  const Mat3 qtq = matmul(transpose(q), q);
  double err = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) err = std::max(err, std::abs(qtq[a][b] - (a == b ? 1.0 : 0.0)));
  const double det = dot(q[0], cross(q[1], q[2]));
  if (!(err <= tolerance)) throw NotARotation("Q^T Q deviates from identity by " + std::to_string(err));
  if (!(std::abs(det - 1.0) <= tolerance))
    throw NotARotation("det Q = " + std::to_string(det));
}

/// (u, G) -> (Q u, Q G Q^T): the director and gradient seen in a rotated frame.
inline std::pair<Vec3, Mat3> apply_rotation(const Vec3& u, const PointwiseGradient& g,
                                            const Mat3& q) {
  require_rotation(q);
  return {matvec(q, u), matmul(matmul(q, g), transpose(q))};
}

/// Rotation taking unit u to the north pole (0, 0, 1) (Rodrigues formula).
inline Mat3 rotation_to_north_pole(const Vec3& u) {
  const Vec3 n{0.0, 0.0, 1.0};
  const Vec3 axis = cross(u, n);
  const double s = norm(axis);
  const double c = dot(u, n);
  Mat3 r{};
  if (s < 1e-14) {
    // u = +n or -n
    r[0][0] = 1.0;
    r[1][1] = c > 0 ? 1.0 : -1.0;
    r[2][2] = c > 0 ? 1.0 : -1.0;
    return r;
  }
  const Mat3 kx = {Vec3{0.0, -axis[2], axis[1]}, Vec3{axis[2], 0.0, -axis[0]},
                   Vec3{-axis[1], axis[0], 0.0}};
  const Mat3 kx2 = matmul(kx, kx);
  const double f = (1.0 - c) / (s * s);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) r[a][b] = (a == b ? 1.0 : 0.0) + kx[a][b] + f * kx2[a][b];
  return r;
}

/// u^i u^k W_{p_alpha^k}(u, G) d_alpha w^i, the constraint-coupling term that
/// stays invariant under a common frame rotation of (u, G, grad w).
inline double constraint_coupling(const Vec3& u, const PointwiseGradient& g,
                                  const PointwiseGradient& grad_w, const FrankConstants& k,
                                  double tolerance = kUnitTolerance) {
  const Mat3 wp = dW_dp(u, g, k, tolerance);
  double s = 0.0;
  for (int alpha = 0; alpha < 3; ++alpha) {
    const double uw = dot(u, wp[alpha]);  // u^k W_{p_alpha^k}
    s += uw * dot(u, grad_w[alpha]);      // u^i d_alpha w^i
  }
  return s;
}

}  // namespace elof
