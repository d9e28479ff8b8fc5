#pragma once

// Real-to-complex 3-D FFTs on the periodic grid (FFTW backend).
//
// Spectral layout: for a grid of N points the half-spectrum has N x N x (N/2+1)
// modes stored as s = mx + (N/2+1) (my + N mz), with mx in [0, N/2] and my, mz
// in [0, N) mapped to signed frequencies in [-N/2, N/2).

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "elof/grid.hpp"

namespace elof::spectral {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

class Transform {
 public:
  explicit Transform(int n)
      : n_(n),
        real_size_(static_cast<std::size_t>(n) * n * n),
        spec_size_(static_cast<std::size_t>(n) * n * (n / 2 + 1)),
        real_(fftw_alloc_real(real_size_)),
        spec_(fftw_alloc_complex(spec_size_)) {
    // FFTW arrays are row-major with the last index fastest, so (z, y, x) order
    // matches the x-fastest grid layout.
    forward_ = fftw_plan_dft_r2c_3d(n, n, n, real_.get(), spec_.get(), FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_3d(n, n, n, spec_.get(), real_.get(), FFTW_ESTIMATE);
  }
  ~Transform() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }
  Transform(const Transform&) = delete;
  Transform& operator=(const Transform&) = delete;

  /// Process-wide cached transform for grid size n. Not thread-safe on first use.
  static const Transform& get(int n) {
    static std::map<int, std::unique_ptr<Transform>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Transform>(n);
    return *slot;
  }

  int n() const noexcept { return n_; }
  std::size_t spectral_size() const noexcept { return spec_size_; }

  Spectrum forward(std::span<const double> in) const {
    std::copy(in.begin(), in.end(), real_.get());
    fftw_execute(forward_);
    const auto* s = reinterpret_cast<const Complex*>(spec_.get());
    return Spectrum(s, s + spec_size_);
  }

  /// Normalized inverse: inverse(forward(f)) == f up to roundoff.
  void inverse(const Spectrum& in, std::span<double> out) const {
    auto* s = reinterpret_cast<Complex*>(spec_.get());
    std::copy(in.begin(), in.end(), s);
    fftw_execute(inverse_);
    const double scale = 1.0 / static_cast<double>(real_size_);
    for (std::size_t i = 0; i < real_size_; ++i) out[i] = real_.get()[i] * scale;
  }

 private:
  struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
  };

  int n_;
  std::size_t real_size_;
  std::size_t spec_size_;
  std::unique_ptr<double, FftwFree> real_;
  std::unique_ptr<fftw_complex, FftwFree> spec_;
  fftw_plan forward_{};
  fftw_plan inverse_{};
};

/// Signed integer frequency of spectral index m along y or z.
inline int signed_frequency(int m, int n) { return m < n / 2 ? m : m - n; }

/// Calls fn(s, fx, fy, fz) for every stored mode.
template <class Fn>
void for_each_mode(int n, Fn&& fn) {
  const int nx = n / 2 + 1;
  std::size_t s = 0;
  for (int mz = 0; mz < n; ++mz) {
    const int fz = signed_frequency(mz, n);
    for (int my = 0; my < n; ++my) {
      const int fy = signed_frequency(my, n);
      for (int mx = 0; mx < nx; ++mx, ++s) fn(s, mx, fy, fz);
    }
  }
}

/// Wavenumber used for odd derivatives: the Nyquist frequency is dropped so
/// that derivatives of real fields stay real.
inline double derivative_wavenumber(int f, const Grid& g) {
  return (2 * std::abs(f) == g.n()) ? 0.0 : g.fundamental() * f;
}

/// |k|^2 with true wavenumbers (used for Laplacian-type symbols).
inline double wavenumber_sq(int fx, int fy, int fz, const Grid& g) {
  const double k0 = g.fundamental();
  return k0 * k0 * static_cast<double>(fx * fx + fy * fy + fz * fz);
}

/// 2/3-rule: keep modes with |f| < N/3 along every axis.
inline bool retained_by_dealiasing(int fx, int fy, int fz, int n) {
  const auto keep = [n](int f) { return 3 * std::abs(f) < n; };
  return keep(fx) && keep(fy) && keep(fz);
}

}  // namespace elof::spectral
