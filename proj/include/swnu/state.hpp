#pragma once

#include <cmath>

#include "swnu/field.hpp"
#include "swnu/operators.hpp"

namespace swnu {

/// Height perturbation rho = (fluid height) - 1 and velocity u.
struct State {
  SpectralField rho;
  VectorField u;

  const Grid& grid() const { return rho.grid(); }

  friend State operator+(const State& a, const State& b) { return {a.rho + b.rho, a.u + b.u}; }
  friend State operator-(const State& a, const State& b) { return {a.rho - b.rho, a.u - b.u}; }
  friend State operator*(double s, const State& a) { return {s * a.rho, s * a.u}; }

  State resampled(const Grid& target) const { return {rho.resampled(target), u.resampled(target)}; }
};

/// ||rho||_{H^s} + ||u||_{H^s}, the distance used by the error estimates.
inline double state_norm(const State& st, double s) { return sobolev_norm(st.rho, s) + sobolev_norm(st.u, s); }

/// sqrt(||rho||^2 + ||u||^2) in H^s (or homogeneous), the energy-type norm.
inline double state_energy_norm(const State& st, const NormParams& p) {
  return std::sqrt(sobolev_norm_squared(st.rho, p) + sobolev_norm_squared(st.u.c1(), p) +
                   sobolev_norm_squared(st.u.c2(), p));
}

}  // namespace swnu
