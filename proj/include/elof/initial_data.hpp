#pragma once

// Deterministic initial states: constant, twisted and perturbed directors
// near a unit vector b, and divergence-free band-limited velocities.
//
// Random fields are finite Fourier sums whose coefficients come from a
// counter-based generator keyed by (seed, stream, mode), so the continuous
// field does not depend on the grid it is sampled on.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include "elof/diagnostics.hpp"
#include "elof/errors.hpp"
#include "elof/frank_energy.hpp"
#include "elof/grid.hpp"
#include "elof/operators.hpp"

namespace elof {

enum class InitialKind { constant, twist, perturbed_constant, random_smooth };

inline std::string_view initial_kind_name(InitialKind k) {
  switch (k) {
    case InitialKind::constant: return "constant";
    case InitialKind::twist: return "twist";
    case InitialKind::perturbed_constant: return "perturbed_constant";
    case InitialKind::random_smooth: return "random_smooth";
  }
  return "?";
}

inline std::optional<InitialKind> parse_initial_kind(std::string_view s) {
  for (auto k : {InitialKind::constant, InitialKind::twist, InitialKind::perturbed_constant,
                 InitialKind::random_smooth})
    if (s == initial_kind_name(k)) return k;
  return std::nullopt;
}

/// kind:
///   constant            u = b, v = 0
///   twist               u = (cos tau z, sin tau z, 0), tau = 2 pi mode_count / L,
///                       plus a random perturbation of size `amplitude`
///   perturbed_constant  u = b + amplitude * fixed smooth mode, normalized;
///                       v = Taylor-Green vortex with RMS `amplitude`
///   random_smooth       u = b + random band-limited perturbation, normalized;
///                       v = random band-limited, projected, RMS `amplitude`
/// Band-limited fields use integer frequencies |f_i| <= mode_count; with
/// spectral_width > 0 each mode is weighted by exp(-|f|^2 / (2 width^2)).
struct InitialSpec {
  InitialKind kind = InitialKind::constant;
  Vec3 b{0.0, 0.0, 1.0};
  double amplitude = 0.0;
  int mode_count = 2;
  double spectral_width = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw std::invalid_argument("amplitude must be >= 0");
    if (std::abs(norm(b) - 1.0) > 1e-12) throw std::invalid_argument("b must be a unit vector");
    if (mode_count < 1) throw std::invalid_argument("mode_count must be >= 1");
    if (!(spectral_width >= 0.0)) throw std::invalid_argument("spectral_width must be >= 0");
  }

  friend bool operator==(const InitialSpec&, const InitialSpec&) = default;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Standard normal variate determined by (seed, stream, counter).
inline double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t key = splitmix64(splitmix64(seed ^ splitmix64(stream)) + counter);
  const std::uint64_t a = splitmix64(key), b = splitmix64(key ^ 0x5851f42d4c957f2dULL);
  const double u1 = (static_cast<double>(a >> 11) + 0.5) * 0x1p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

struct FourierMode {
  int f[3];
  Vec3 cos_coef;
  Vec3 sin_coef;
};

/// Random vector-valued modes with 1 <= |f|_inf <= m.
inline std::vector<FourierMode> random_modes(const InitialSpec& spec, std::uint64_t stream) {
  std::vector<FourierMode> modes;
  const int m = spec.mode_count;
  std::uint64_t counter = 0;
  for (int fz = -m; fz <= m; ++fz)
    for (int fy = -m; fy <= m; ++fy)
      for (int fx = -m; fx <= m; ++fx) {
        // one representative of each +-f pair, zero mode excluded
        const bool positive = fz > 0 || (fz == 0 && (fy > 0 || (fy == 0 && fx > 0)));
        if (!positive) continue;
        const double r2 = fx * fx + fy * fy + fz * fz;
        const double w = spec.spectral_width > 0.0
                             ? std::exp(-r2 / (2.0 * spec.spectral_width * spec.spectral_width))
                             : 1.0;
        FourierMode mode{{fx, fy, fz}, {}, {}};
        for (int c = 0; c < 3; ++c) {
          mode.cos_coef[c] = w * counter_normal(spec.seed, stream, counter++);
          mode.sin_coef[c] = w * counter_normal(spec.seed, stream, counter++);
        }
        modes.push_back(mode);
      }
  return modes;
}

inline VectorField sample_modes(const Grid& g, const std::vector<FourierMode>& modes) {
  VectorField out(g);
  const double k0 = g.fundamental();
  for (int k = 0; k < g.n(); ++k)
    for (int j = 0; j < g.n(); ++j)
      for (int i = 0; i < g.n(); ++i) {
        const double x = g.coordinate(i), y = g.coordinate(j), z = g.coordinate(k);
        Vec3 val{};
        for (const auto& m : modes) {
          const double ph = k0 * (m.f[0] * x + m.f[1] * y + m.f[2] * z);
          const double c = std::cos(ph), s = std::sin(ph);
          for (int d = 0; d < 3; ++d) val[d] += m.cos_coef[d] * c + m.sin_coef[d] * s;
        }
        out.set(g.index(i, j, k), val);
      }
  return out;
}

inline double rms(const VectorField& v) {
  double s = 0.0;
  for (double x : v.data()) s += x * x;
  return std::sqrt(s / static_cast<double>(v.points()));
}

/// Orthonormal pair spanning the plane orthogonal to b.
inline std::pair<Vec3, Vec3> orthonormal_complement(const Vec3& b) {
  const Vec3 seed = std::abs(b[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 e1 = cross(b, seed);
  const double n = norm(e1);
  e1 = {e1[0] / n, e1[1] / n, e1[2] / n};
  return {e1, cross(b, e1)};
}

/// Perturbation field of unit RMS used for the director.
inline VectorField director_perturbation(const InitialSpec& spec, const Grid& g) {
  VectorField p(g);
  if (spec.kind == InitialKind::perturbed_constant) {
    const auto [e1, e2] = orthonormal_complement(spec.b);
    const double k = g.fundamental() * spec.mode_count;
    for (int kk = 0; kk < g.n(); ++kk)
      for (int j = 0; j < g.n(); ++j)
        for (int i = 0; i < g.n(); ++i) {
          const double a = std::cos(k * g.coordinate(i)) * std::sin(k * g.coordinate(j));
          const double b = std::sin(k * g.coordinate(kk));
          p.set(g.index(i, j, kk), {a * e1[0] + b * e2[0], a * e1[1] + b * e2[1], a * e1[2] + b * e2[2]});
        }
  } else {
    p = sample_modes(g, random_modes(spec, 1));
  }
  const double r = rms(p);
  if (r > 0.0) p *= 1.0 / r;
  return p;
}

}  // namespace detail

/// Unit director field described by spec.
inline DirectorField make_director(const InitialSpec& spec, const Grid& g) {
  spec.validate();
  DirectorField u(g);
  if (spec.kind == InitialKind::twist) {
    const double tau = g.fundamental() * spec.mode_count;
    for (int k = 0; k < g.n(); ++k) {
      const double z = g.coordinate(k);
      for (int j = 0; j < g.n(); ++j)
        for (int i = 0; i < g.n(); ++i) u.set(g.index(i, j, k), {std::cos(tau * z), std::sin(tau * z), 0.0});
    }
  } else {
    for (std::size_t i = 0; i < u.points(); ++i) u.set(i, spec.b);
  }
  if (spec.kind == InitialKind::constant || spec.amplitude == 0.0) return u;
  u.axpy(spec.amplitude, detail::director_perturbation(spec, g));
  for (std::size_t i = 0; i < u.points(); ++i) {
    const double n = std::sqrt(u.magnitude_sq(i));
    if (!(n > 0.0)) throw std::invalid_argument("director perturbation cancels b");
    for (int c = 0; c < 3; ++c) u(c, i) /= n;
  }
  return u;
}

/// Divergence-free, zero-mean velocity with RMS equal to spec.amplitude.
inline VelocityField make_velocity(const InitialSpec& spec, const Grid& g) {
  spec.validate();
  VelocityField v(g);
  if (spec.kind == InitialKind::constant || spec.kind == InitialKind::twist || spec.amplitude == 0.0)
    return v;
  if (spec.kind == InitialKind::perturbed_constant) {
    const double k = g.fundamental() * spec.mode_count;
    for (int kk = 0; kk < g.n(); ++kk)
      for (int j = 0; j < g.n(); ++j)
        for (int i = 0; i < g.n(); ++i) {
          const double x = k * g.coordinate(i), y = k * g.coordinate(j), z = k * g.coordinate(kk);
          v.set(g.index(i, j, kk), {std::sin(x) * std::cos(y) * std::cos(z),
                                    -std::cos(x) * std::sin(y) * std::cos(z), 0.0});
        }
  } else {
    v = leray_project(detail::sample_modes(g, detail::random_modes(spec, 2)));
  }
  const double r = detail::rms(v);
  if (r > 0.0) v *= spec.amplitude / r;
  return v;
}

struct Calibrated {
  VelocityField v;
  DirectorField u;
  double scale = 0.0;     // s in v = s v0, u = normalize(b + s (u0 - b))
  double achieved = 0.0;  // l3_uloc(v) + l3_uloc(grad u)
};

/// Scales the perturbation (v0, u0 - b) so that
/// l3_uloc(v, R0) + l3_uloc(grad u, R0) equals target to within 1e-3 target.
inline Calibrated calibrate_smallness(const VelocityField& v0, const DirectorField& u0, const Vec3& b,
                                      double radius, double target, int center_stride = 1) {
  require_same_grid(v0.grid(), u0.grid());
  const Grid& g = v0.grid();
  auto build = [&](double s) {
    Calibrated c{s * v0, DirectorField(g), s, 0.0};
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec3 w = u0.at(i);
      Vec3 z{b[0] + s * (w[0] - b[0]), b[1] + s * (w[1] - b[1]), b[2] + s * (w[2] - b[2])};
      const double n = norm(z);
      if (!(n > 0.0)) throw CannotCalibrate("director perturbation reaches the origin at scale " + std::to_string(s));
      c.u.set(i, {z[0] / n, z[1] / n, z[2] / n});
    }
    c.achieved = l3_uloc(c.v, radius, center_stride) + l3_uloc(gradient(c.u), radius, center_stride);
    return c;
  };
  if (!(target > 0.0)) return build(0.0);

  const double tol = 1e-3 * target;
  Calibrated hi = build(1.0);
  if (std::abs(hi.achieved - target) <= tol) return hi;
  double lo_s = 0.0, hi_s = 1.0;
  while (hi.achieved < target) {
    lo_s = hi_s;
    hi_s *= 2.0;
    if (hi_s > 1e6) throw CannotCalibrate("target " + std::to_string(target) + " is not reachable by scaling");
    hi = build(hi_s);
  }
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo_s + hi_s);
    Calibrated c = build(mid);
    if (std::abs(c.achieved - target) <= tol) return c;
    (c.achieved < target ? lo_s : hi_s) = mid;
  }
  throw CannotCalibrate("bisection did not reach target " + std::to_string(target) + " within 40 iterations");
}

}  // namespace elof
