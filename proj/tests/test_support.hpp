#pragma once

#include <cmath>
#include <random>

#include "elof/frank_energy.hpp"
#include "elof/grid.hpp"
#include "elof/verify/sampler.hpp"

namespace elof::testing {

using Sampler = elof::verify::Sampler;

inline double max_abs_diff(const Mat3& a, const Mat3& b) {
  double m = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

inline double max_abs_entry(const Mat3& a) {
  double m = 0.0;
  for (const auto& r : a)
    for (double x : r) m = std::max(m, std::abs(x));
  return m;
}

/// Central finite differences of the unchecked density in the gradient slot.
inline Mat3 fd_density_dp(const Vec3& u, Mat3 g, const FrankConstants& k, double step) {
  Mat3 out{};
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 3; ++i) {
      const double g0 = g[a][i];
      g[a][i] = g0 + step;
      const double wp = raw::density(u, g, k);
      g[a][i] = g0 - step;
      const double wm = raw::density(u, g, k);
      g[a][i] = g0;
      out[a][i] = (wp - wm) / (2.0 * step);
    }
  return out;
}

inline Vec3 fd_density_du(Vec3 u, const Mat3& g, const FrankConstants& k, double step) {
  Vec3 out{};
  for (int i = 0; i < 3; ++i) {
    const double u0 = u[i];
    u[i] = u0 + step;
    const double wp = raw::density(u, g, k);
    u[i] = u0 - step;
    const double wm = raw::density(u, g, k);
    u[i] = u0;
    out[i] = (wp - wm) / (2.0 * step);
  }
  return out;
}

/// Samples fn(x, y, z) -> component array at every node.
template <int Rank, class Fn>
Field<Rank> sample_field(const Grid& g, Fn&& fn) {
  Field<Rank> f(g);
  const int n = g.n();
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const auto vals = fn(g.coordinate(i), g.coordinate(j), g.coordinate(k));
        for (int c = 0; c < Field<Rank>::components; ++c) f(c, g.index(i, j, k)) = vals[c];
      }
  return f;
}

/// Sum of a few random low Fourier modes (|f| <= kmax per axis) in every component.
template <int Rank>
Field<Rank> random_band_limited(const Grid& g, Sampler& rng, int kmax = 3) {
  constexpr int nc = Field<Rank>::components;
  struct Mode {
    int f[3];
    double a[nc], b[nc];
  };
  std::vector<Mode> modes(8);
  for (auto& m : modes) {
    for (int& x : m.f) x = static_cast<int>(std::floor(rng.uniform(-kmax, kmax + 1)));
    for (int c = 0; c < nc; ++c) {
      m.a[c] = rng.normal();
      m.b[c] = rng.normal();
    }
  }
  const double k0 = g.fundamental();
  return sample_field<Rank>(g, [&](double x, double y, double z) {
    std::array<double, nc> out{};
    for (const auto& m : modes) {
      const double ph = k0 * (m.f[0] * x + m.f[1] * y + m.f[2] * z);
      for (int c = 0; c < nc; ++c) out[c] += m.a[c] * std::cos(ph) + m.b[c] * std::sin(ph);
    }
    return out;
  });
}

template <int Rank>
double max_abs_diff(const Field<Rank>& a, const Field<Rank>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace elof::testing
