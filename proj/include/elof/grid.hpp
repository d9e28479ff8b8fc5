#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "elof/errors.hpp"
#include "elof/frank_energy.hpp"

namespace elof {

/// Periodic cube [0, L)^3 sampled by N points per axis (N a power of two, N >= 8).
class Grid {
 public:
  Grid(int n, double length) : n_(n), length_(length) {
    if (n < 8 || (n & (n - 1)) != 0)
      throw std::invalid_argument("grid size must be a power of two >= 8, got " +
                                  std::to_string(n));
    if (!(length > 0.0) || !std::isfinite(length))
      throw std::invalid_argument("box length must be positive");
  }

  int n() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  double spacing() const noexcept { return length_ / n_; }
  double cell_volume() const noexcept {
    const double h = spacing();
    return h * h * h;
  }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_) *
           static_cast<std::size_t>(n_);
  }

  // x-fastest: index = i + N (j + N k)
  std::size_t index(int i, int j, int k) const noexcept {
    return static_cast<std::size_t>(wrap(i)) +
           static_cast<std::size_t>(n_) *
               (static_cast<std::size_t>(wrap(j)) +
                static_cast<std::size_t>(n_) * static_cast<std::size_t>(wrap(k)));
  }
  int wrap(int i) const noexcept {
    const int r = i % n_;
    return r < 0 ? r + n_ : r;
  }
  double coordinate(int i) const noexcept { return spacing() * i; }

  /// 2 pi / L
  double fundamental() const noexcept { return 2.0 * std::numbers::pi / length_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int n_;
  double length_;
};

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b))
    throw GridMismatch("grid mismatch: N=" + std::to_string(a.n()) + " L=" +
                       std::to_string(a.length()) + " vs N=" + std::to_string(b.n()) +
                       " L=" + std::to_string(b.length()));
}

constexpr int components_of_rank(int rank) { return rank == 0 ? 1 : 3 * components_of_rank(rank - 1); }

/// Real field of tensor rank 0..3 on a Grid. Storage is component-major; each
/// component is an x-fastest block of N^3 samples. For rank 2 the component
/// (a, b) is stored at 3 a + b, matching PointwiseGradient[a][b].
template <int Rank>
class Field {
 public:
  static_assert(Rank >= 0 && Rank <= 3);
  static constexpr int rank = Rank;
  static constexpr int components = components_of_rank(Rank);

  explicit Field(const Grid& grid) : grid_(grid), data_(components * grid.size(), 0.0) {}

  const Grid& grid() const noexcept { return grid_; }
  std::size_t points() const noexcept { return grid_.size(); }

  std::span<double> comp(int c) { return {data_.data() + c * points(), points()}; }
  std::span<const double> comp(int c) const { return {data_.data() + c * points(), points()}; }
  std::span<double> comp(int a, int b) requires(Rank == 2) { return comp(3 * a + b); }
  std::span<const double> comp(int a, int b) const requires(Rank == 2) { return comp(3 * a + b); }

  double& operator()(int c, std::size_t idx) { return data_[c * points() + idx]; }
  double operator()(int c, std::size_t idx) const { return data_[c * points() + idx]; }
  double& operator[](std::size_t idx) requires(Rank == 0) { return data_[idx]; }
  double operator[](std::size_t idx) const requires(Rank == 0) { return data_[idx]; }

  Vec3 at(std::size_t idx) const requires(Rank == 1) {
    return {(*this)(0, idx), (*this)(1, idx), (*this)(2, idx)};
  }
  void set(std::size_t idx, const Vec3& v) requires(Rank == 1) {
    for (int c = 0; c < 3; ++c) (*this)(c, idx) = v[c];
  }
  Mat3 at(std::size_t idx) const requires(Rank == 2) {
    Mat3 m{};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) m[a][b] = (*this)(3 * a + b, idx);
    return m;
  }
  void set(std::size_t idx, const Mat3& m) requires(Rank == 2) {
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) (*this)(3 * a + b, idx) = m[a][b];
  }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  /// Euclidean (rank 1) or Frobenius (rank 2+) magnitude squared at a node.
  double magnitude_sq(std::size_t idx) const {
    double s = 0.0;
    for (int c = 0; c < components; ++c) {
      const double x = (*this)(c, idx);
      s += x * x;
    }
    return s;
  }

  bool all_finite() const {
    for (double x : data_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  Field& operator+=(const Field& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Field& operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
  }
  /// this += s * o
  Field& axpy(double s, const Field& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }

  friend bool operator==(const Field& a, const Field& b) {
    return a.grid_ == b.grid_ && a.data_ == b.data_;
  }

 private:
  Grid grid_;
  std::vector<double> data_;
};

using ScalarField = Field<0>;
using VectorField = Field<1>;
using TensorField = Field<2>;
using Tensor3Field = Field<3>;

template <int Rank>
double max_abs(const Field<Rank>& f) {
  double m = 0.0;
  for (double x : f.data()) m = std::max(m, std::abs(x));
  return m;
}

template <int Rank>
double mean(const Field<Rank>& f, int c = 0) {
  double s = 0.0;
  for (double x : f.comp(c)) s += x;
  return s / static_cast<double>(f.points());
}

/// h^3-weighted sum of |f|^2 over the box.
template <int Rank>
double l2_norm_sq(const Field<Rank>& f) {
  double s = 0.0;
  for (double x : f.data()) s += x * x;
  return s * f.grid().cell_volume();
}

/// h^3-weighted inner product.
template <int Rank>
double inner(const Field<Rank>& a, const Field<Rank>& b) {
  require_same_grid(a.grid(), b.grid());
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
  return s * a.grid().cell_volume();
}

/// Lattice translation: out(x) = f(x - d h).
template <int Rank>
Field<Rank> shift(const Field<Rank>& f, int dx, int dy, int dz) {
  const Grid& g = f.grid();
  Field<Rank> out(g);
  const int n = g.n();
  for (int c = 0; c < Field<Rank>::components; ++c)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          out(c, g.index(i + dx, j + dy, k + dz)) = f(c, g.index(i, j, k));
  return out;
}

/// Closed geodesic ball on the periodic box.
struct Ball {
  Vec3 center{};
  double radius = 0.0;
};

/// Largest admissible radius: L/2 - h.
inline double max_ball_radius(const Grid& g) { return 0.5 * g.length() - g.spacing(); }

inline void require_ball_fits(const Grid& g, double radius) {
  if (!(radius > 0.0)) throw BallTooLarge("ball radius must be positive");
  if (radius > max_ball_radius(g))
    throw BallTooLarge("ball radius " + std::to_string(radius) + " exceeds L/2 - h = " +
                       std::to_string(max_ball_radius(g)));
}

struct LatticeOffset {
  int dx, dy, dz;
};

/// Integer offsets of lattice nodes within periodic distance <= radius of a
/// lattice-node center, in a fixed (z, y, x) order.
inline std::vector<LatticeOffset> ball_offsets(const Grid& g, double radius) {
  require_ball_fits(g, radius);
  const double h = g.spacing();
  const int m = static_cast<int>(std::ceil(radius / h));
  std::vector<LatticeOffset> out;
  for (int dz = -m; dz <= m; ++dz)
    for (int dy = -m; dy <= m; ++dy)
      for (int dx = -m; dx <= m; ++dx) {
        const double r2 = h * h * static_cast<double>(dx * dx + dy * dy + dz * dz);
        if (r2 <= radius * radius) out.push_back({dx, dy, dz});
      }
  return out;
}

/// Nodes of a ball with arbitrary center, as flat indices in a fixed order
/// relative to the node at floor(center / h).
inline std::vector<std::size_t> ball_nodes(const Grid& g, const Ball& ball) {
  require_ball_fits(g, ball.radius);
  const double h = g.spacing();
  const int m = static_cast<int>(std::ceil(ball.radius / h)) + 1;
  int base[3];
  double frac[3];
  for (int d = 0; d < 3; ++d) {
    const double s = ball.center[d] / h;
    const double fl = std::floor(s);
    base[d] = static_cast<int>(fl);
    frac[d] = s - fl;
  }
  std::vector<std::size_t> out;
  for (int dz = -m; dz <= m; ++dz)
    for (int dy = -m; dy <= m; ++dy)
      for (int dx = -m; dx <= m; ++dx) {
        const double rx = (dx - frac[0]) * h, ry = (dy - frac[1]) * h, rz = (dz - frac[2]) * h;
        if (rx * rx + ry * ry + rz * rz <= ball.radius * ball.radius)
          out.push_back(g.index(base[0] + dx, base[1] + dy, base[2] + dz));
      }
  return out;
}

/// (sum over ball nodes of |f|^p h^3)^(1/p), |.| the pointwise Euclidean /
/// Frobenius magnitude.
template <int Rank>
double local_lp_norm(const Field<Rank>& f, const Ball& ball, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("local_lp_norm requires p >= 1");
  double s = 0.0;
  for (std::size_t idx : ball_nodes(f.grid(), ball)) s += std::pow(f.magnitude_sq(idx), 0.5 * p);
  return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

}  // namespace elof
