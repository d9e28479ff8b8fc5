#pragma once

// Seeded random draws of directors, gradients, rotations and admissible
// moduli for property checks.

#include <cmath>
#include <cstdint>
#include <random>

#include "elof/frank_energy.hpp"

namespace elof::verify {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }

  Vec3 unit_vector() {
    for (;;) {
      Vec3 v{normal(), normal(), normal()};
      const double n = norm(v);
      if (n > 1e-3) return {v[0] / n, v[1] / n, v[2] / n};
    }
  }

  Mat3 matrix(double scale = 1.0) {
    Mat3 m{};
    for (auto& row : m)
      for (double& x : row) x = scale * normal();
    return m;
  }

  /// Uniform random rotation from a unit quaternion.
  Mat3 rotation() {
    double q[4] = {normal(), normal(), normal(), normal()};
    const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    for (double& x : q) x /= n;
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    return {Vec3{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
            Vec3{2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
            Vec3{2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}};
  }

  /// Constants satisfying Ericksen's inequalities.
  FrankConstants admissible_constants() {
    for (;;) {
      const double k1 = uniform(0.1, 3.0), k2 = uniform(0.1, 3.0), k3 = uniform(0.1, 3.0);
      const double k4 = uniform(-0.99, 0.99) * k2;
      if (2.0 * k1 >= k2 + k4) return validate_constants(k1, k2, k3, k4);
    }
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace elof::verify
