#pragma once

// Second, deliberately separate implementation of the equal-constant system
// W = |grad u|^2 (Navier-Stokes coupled to harmonic map heat flow):
//
//   v_t + (v.grad) v + grad p = lap v - div(2 grad u (.) grad u),
//   u_t + (v.grad) u          = 2 (lap u + |grad u|^2 u),
//
// with (grad u (.) grad u)[j][i] = d_j u^k d_i u^k. Written directly from these
// formulas without the Frank-density machinery; used to cross-check the
// general solver.

#include "elof/grid.hpp"
#include "elof/operators.hpp"

namespace elof::reference {

struct SimpleState {
  VectorField v;
  VectorField u;
};

/// 2 (lap u + |grad u|^2 u), products dealiased.
inline VectorField harmonic_map_force(const VectorField& u) {
  const TensorField g = gradient(u);
  ScalarField energy(u.grid());
  for (std::size_t i = 0; i < u.points(); ++i) energy[i] = g.magnitude_sq(i);
  VectorField lower(u.grid());
  for (int c = 0; c < 3; ++c) {
    auto dst = lower.comp(c);
    const auto src = u.comp(c);
    for (std::size_t i = 0; i < u.points(); ++i) dst[i] = energy[i] * src[i];
  }
  VectorField out = laplacian(u) + dealias(lower);
  out *= 2.0;
  return out;
}

/// (a.grad) b, dealiased.
inline VectorField convect(const VectorField& a, const VectorField& b) {
  const TensorField g = gradient(b);
  VectorField out(a.grid());
  for (int c = 0; c < 3; ++c) {
    auto dst = out.comp(c);
    for (int j = 0; j < 3; ++j) {
      const auto aj = a.comp(j);
      const auto gj = g.comp(j, c);
      for (std::size_t i = 0; i < a.points(); ++i) dst[i] += aj[i] * gj[i];
    }
  }
  return dealias(out);
}

/// div(2 grad u (.) grad u), i.e. sum_j d_j (2 d_j u^k d_i u^k).
inline VectorField harmonic_map_stress_divergence(const VectorField& u) {
  const TensorField g = gradient(u);
  TensorField s(u.grid());
  for (int j = 0; j < 3; ++j)
    for (int c = 0; c < 3; ++c) {
      auto dst = s.comp(j, c);
      for (int m = 0; m < 3; ++m) {
        const auto a = g.comp(j, m);
        const auto b = g.comp(c, m);
        for (std::size_t i = 0; i < u.points(); ++i) dst[i] += 2.0 * a[i] * b[i];
      }
    }
  return divergence(dealias(s));
}

inline void normalize_nodes(VectorField& u) {
  for (std::size_t i = 0; i < u.points(); ++i) {
    const double n = std::sqrt(u.magnitude_sq(i));
    if (std::abs(n - 1.0) <= 0x1p-50) continue;
    for (int c = 0; c < 3; ++c) u(c, i) /= n;
  }
}

/// u + (du - (u.du) u), then nodewise normalization.
inline VectorField tangent_update(const VectorField& u, const VectorField& du) {
  VectorField out(u.grid());
  for (std::size_t i = 0; i < u.points(); ++i) {
    double ud = 0.0;
    for (int c = 0; c < 3; ++c) ud += u(c, i) * du(c, i);
    for (int c = 0; c < 3; ++c) out(c, i) = u(c, i) + (du(c, i) - ud * u(c, i));
  }
  normalize_nodes(out);
  return out;
}

/// One implicit-Laplacian step: the director increment solves
/// (I - dt lap) du = dt (force - transport) and is applied along the tangent
/// plane; velocity is advanced with (I - dt lap) and projected.
inline SimpleState step(const SimpleState& s, double dt) {
  VectorField fu = harmonic_map_force(s.u) - convect(s.v, s.u);
  fu *= dt;
  VectorField u = tangent_update(s.u, helmholtz_inverse(fu, dt));

  VectorField fv = convect(s.v, s.v) + harmonic_map_stress_divergence(s.u);
  VectorField v = s.v;
  v.axpy(-dt, fv);
  v = leray_project(helmholtz_inverse(v, dt));
  return {std::move(v), std::move(u)};
}

/// v = 0 reduction: one step of harmonic map heat flow.
inline VectorField heat_flow_step(const VectorField& u, double dt) {
  VectorField f = harmonic_map_force(u);
  f *= dt;
  return tangent_update(u, helmholtz_inverse(f, dt));
}

}  // namespace elof::reference
