#pragma once

// Differential operators and elliptic solvers on the periodic grid.
//
// Index conventions follow PointwiseGradient: gradient() prepends the
// derivative direction, so grad(v)[alpha][i] = d_alpha v^i, and divergence()
// contracts the first index, div(T)^i = sum_j d_j T[j][i].

#include <array>
#include <cmath>
#include <complex>

#include "elof/grid.hpp"
#include "elof/spectral.hpp"

namespace elof {

enum class DiffMode { spectral, finite_difference };

namespace detail {

template <int Rank>
std::array<spectral::Spectrum, Field<Rank>::components> forward_all(const Field<Rank>& f) {
  const auto& fft = spectral::Transform::get(f.grid().n());
  std::array<spectral::Spectrum, Field<Rank>::components> out;
  for (int c = 0; c < Field<Rank>::components; ++c) out[c] = fft.forward(f.comp(c));
  return out;
}

/// Multiplies every component by a real symbol sigma(fx, fy, fz).
template <int Rank, class Symbol>
Field<Rank> apply_real_symbol(const Field<Rank>& f, Symbol&& sigma) {
  const Grid& g = f.grid();
  const auto& fft = spectral::Transform::get(g.n());
  std::vector<double> weights(fft.spectral_size());
  spectral::for_each_mode(g.n(), [&](std::size_t s, int fx, int fy, int fz) {
    weights[s] = sigma(fx, fy, fz);
  });
  Field<Rank> out(g);
  for (int c = 0; c < Field<Rank>::components; ++c) {
    auto spec = fft.forward(f.comp(c));
    for (std::size_t s = 0; s < spec.size(); ++s) spec[s] *= weights[s];
    fft.inverse(spec, out.comp(c));
  }
  return out;
}

inline std::array<std::vector<double>, 3> derivative_wavenumbers(const Grid& g) {
  const auto& fft = spectral::Transform::get(g.n());
  std::array<std::vector<double>, 3> k;
  for (auto& v : k) v.resize(fft.spectral_size());
  spectral::for_each_mode(g.n(), [&](std::size_t s, int fx, int fy, int fz) {
    k[0][s] = spectral::derivative_wavenumber(fx, g);
    k[1][s] = spectral::derivative_wavenumber(fy, g);
    k[2][s] = spectral::derivative_wavenumber(fz, g);
  });
  return k;
}

/// Second-order central difference of component data along axis d.
inline void central_difference(const Grid& g, std::span<const double> f, int d,
                               std::span<double> out) {
  const int n = g.n();
  const double inv = 0.5 / g.spacing();
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int p[3] = {i + (d == 0), j + (d == 1), k + (d == 2)};
        const int m[3] = {i - (d == 0), j - (d == 1), k - (d == 2)};
        out[g.index(i, j, k)] =
            (f[g.index(p[0], p[1], p[2])] - f[g.index(m[0], m[1], m[2])]) * inv;
      }
}

}  // namespace detail

/// d_alpha applied to every component: out[alpha][rest] = d_alpha f[rest].
template <int Rank>
Field<Rank + 1> gradient(const Field<Rank>& f, DiffMode mode = DiffMode::spectral) {
  constexpr int nc = Field<Rank>::components;
  const Grid& g = f.grid();
  Field<Rank + 1> out(g);
  if (mode == DiffMode::finite_difference) {
    for (int alpha = 0; alpha < 3; ++alpha)
      for (int c = 0; c < nc; ++c)
        detail::central_difference(g, f.comp(c), alpha, out.comp(alpha * nc + c));
    return out;
  }
  const auto& fft = spectral::Transform::get(g.n());
  const auto k = detail::derivative_wavenumbers(g);
  const spectral::Complex i1(0.0, 1.0);
  spectral::Spectrum work(fft.spectral_size());
  for (int c = 0; c < nc; ++c) {
    const auto spec = fft.forward(f.comp(c));
    for (int alpha = 0; alpha < 3; ++alpha) {
      for (std::size_t s = 0; s < spec.size(); ++s) work[s] = i1 * k[alpha][s] * spec[s];
      fft.inverse(work, out.comp(alpha * nc + c));
    }
  }
  return out;
}

/// Contraction of the derivative with the first index.
template <int Rank>
Field<Rank - 1> divergence(const Field<Rank>& f, DiffMode mode = DiffMode::spectral) {
  static_assert(Rank >= 1);
  constexpr int nr = Field<Rank - 1>::components;
  const Grid& g = f.grid();
  Field<Rank - 1> out(g);
  if (mode == DiffMode::finite_difference) {
    std::vector<double> tmp(g.size());
    for (int c = 0; c < nr; ++c) {
      auto dst = out.comp(c);
      for (int alpha = 0; alpha < 3; ++alpha) {
        detail::central_difference(g, f.comp(alpha * nr + c), alpha, tmp);
        for (std::size_t i = 0; i < tmp.size(); ++i) dst[i] += tmp[i];
      }
    }
    return out;
  }
  const auto& fft = spectral::Transform::get(g.n());
  const auto k = detail::derivative_wavenumbers(g);
  const spectral::Complex i1(0.0, 1.0);
  for (int c = 0; c < nr; ++c) {
    spectral::Spectrum acc(fft.spectral_size(), spectral::Complex(0.0, 0.0));
    for (int alpha = 0; alpha < 3; ++alpha) {
      const auto spec = fft.forward(f.comp(alpha * nr + c));
      for (std::size_t s = 0; s < spec.size(); ++s) acc[s] += i1 * k[alpha][s] * spec[s];
    }
    fft.inverse(acc, out.comp(c));
  }
  return out;
}

/// curl_i = eps_{i alpha beta} d_alpha v^beta
inline VectorField curl(const VectorField& v, DiffMode mode = DiffMode::spectral) {
  const TensorField g = gradient(v, mode);
  VectorField out(v.grid());
  for (std::size_t idx = 0; idx < v.points(); ++idx) out.set(idx, curl_of(g.at(idx)));
  return out;
}

template <int Rank>
Field<Rank> laplacian(const Field<Rank>& f, DiffMode mode = DiffMode::spectral) {
  const Grid& g = f.grid();
  if (mode == DiffMode::finite_difference) {
    Field<Rank> out(g);
    const int n = g.n();
    const double inv = 1.0 / (g.spacing() * g.spacing());
    for (int c = 0; c < Field<Rank>::components; ++c) {
      const auto src = f.comp(c);
      auto dst = out.comp(c);
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i)
            dst[g.index(i, j, k)] =
                (src[g.index(i + 1, j, k)] + src[g.index(i - 1, j, k)] +
                 src[g.index(i, j + 1, k)] + src[g.index(i, j - 1, k)] +
                 src[g.index(i, j, k + 1)] + src[g.index(i, j, k - 1)] -
                 6.0 * src[g.index(i, j, k)]) *
                inv;
    }
    return out;
  }
  return detail::apply_real_symbol(
      f, [&](int fx, int fy, int fz) { return -spectral::wavenumber_sq(fx, fy, fz, g); });
}

/// Zero-mean solution of -lap(phi) = rhs - mean(rhs).
inline ScalarField poisson_solve_zero_mean(const ScalarField& rhs) {
  const Grid& g = rhs.grid();
  return detail::apply_real_symbol(rhs, [&](int fx, int fy, int fz) {
    const double k2 = spectral::wavenumber_sq(fx, fy, fz, g);
    return k2 > 0.0 ? 1.0 / k2 : 0.0;
  });
}

/// (I - c lap)^{-1} f. With c = 1 this is (-lap + I)^{-1}.
template <int Rank>
Field<Rank> helmholtz_inverse(const Field<Rank>& f, double c) {
  if (!(c >= 0.0)) throw std::invalid_argument("helmholtz_inverse requires c >= 0");
  if (c == 0.0) return f;
  const Grid& g = f.grid();
  return detail::apply_real_symbol(
      f, [&](int fx, int fy, int fz) { return 1.0 / (1.0 + c * spectral::wavenumber_sq(fx, fy, fz, g)); });
}

/// L2-orthogonal projection onto discretely divergence-free fields,
/// v - k (k . v) / |k|^2 with the derivative wavenumbers.
inline VectorField leray_project(const VectorField& v) {
  const Grid& g = v.grid();
  const auto& fft = spectral::Transform::get(g.n());
  const auto k = detail::derivative_wavenumbers(g);
  std::array<spectral::Spectrum, 3> spec = detail::forward_all(v);
  for (std::size_t s = 0; s < fft.spectral_size(); ++s) {
    const double kk = k[0][s] * k[0][s] + k[1][s] * k[1][s] + k[2][s] * k[2][s];
    if (kk == 0.0) continue;
    const spectral::Complex kv = k[0][s] * spec[0][s] + k[1][s] * spec[1][s] + k[2][s] * spec[2][s];
    for (int c = 0; c < 3; ++c) spec[c][s] -= k[c][s] * kv / kk;
  }
  VectorField out(g);
  for (int c = 0; c < 3; ++c) fft.inverse(spec[c], out.comp(c));
  return out;
}

/// 2/3-rule truncation.
template <int Rank>
Field<Rank> dealias(const Field<Rank>& f) {
  const int n = f.grid().n();
  return detail::apply_real_symbol(f, [n](int fx, int fy, int fz) {
    return spectral::retained_by_dealiasing(fx, fy, fz, n) ? 1.0 : 0.0;
  });
}

/// Gaussian filter exp(-width^2 |k|^2 / 2).
template <int Rank>
Field<Rank> mollify(const Field<Rank>& f, double width) {
  if (!(width >= 0.0)) throw std::invalid_argument("mollify requires width >= 0");
  if (width == 0.0) return f;
  const Grid& g = f.grid();
  return detail::apply_real_symbol(f, [&](int fx, int fy, int fz) {
    return std::exp(-0.5 * width * width * spectral::wavenumber_sq(fx, fy, fz, g));
  });
}

/// Sum of |f_hat|^2 over the full spectrum, scaled to match l2_norm_sq().
template <int Rank>
double spectral_l2_norm_sq(const Field<Rank>& f) {
  const int n = f.grid().n();
  const auto spec = detail::forward_all(f);
  double s = 0.0;
  for (const auto& comp : spec)
    spectral::for_each_mode(n, [&](std::size_t idx, int mx, int, int) {
      // interior x-modes stand for themselves and their conjugate partners
      const double w = (mx == 0 || 2 * mx == n) ? 1.0 : 2.0;
      s += w * std::norm(comp[idx]);
    });
  const double n3 = static_cast<double>(f.grid().size());
  return s / n3 * f.grid().cell_volume();
}

}  // namespace elof
