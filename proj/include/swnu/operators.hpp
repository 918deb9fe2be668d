#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "swnu/errors.hpp"
#include "swnu/fft.hpp"
#include "swnu/field.hpp"
#include "swnu/grid.hpp"

namespace swnu {

/// Fourier multiplier |xi|^sigma. The zero mode is mapped to zero whenever sigma != 0.
inline SpectralField lambda_pow(const SpectralField& f, double sigma) {
  if (sigma == 0.0) return f;
  if (sigma < 0.0) {
    double total = 0.0;
    for (const auto& c : f.coeffs()) total += std::norm(c);
    if (std::abs(f.zero_mode()) > 1e-14 * std::sqrt(total)) {
      throw NegativePowerOnNonzeroMean("lambda_pow(" + std::to_string(sigma) + ") on a field with mean " +
                                       std::to_string(std::abs(f.zero_mode())));
    }
  }
  return f.multiply(
      [sigma](double a, double b) {
        const double r = std::hypot(a, b);
        return r == 0.0 ? cplx(0.0) : cplx(std::pow(r, sigma));
      },
      true);
}

/// d/dx_axis, axis 0 or 1.
inline SpectralField partial(const SpectralField& f, int axis) {
  return f.multiply([axis](double a, double b) { return cplx(0.0, axis == 0 ? a : b); }, true);
}

inline VectorField grad(const SpectralField& f) { return VectorField(partial(f, 0), partial(f, 1)); }

/// (-d2 f, d1 f).
inline VectorField perp_grad(const SpectralField& f) { return VectorField(-partial(f, 1), partial(f, 0)); }

inline SpectralField div(const VectorField& u) { return partial(u.c1(), 0) + partial(u.c2(), 1); }

inline SpectralField curl(const VectorField& u) { return partial(u.c2(), 0) - partial(u.c1(), 1); }

inline SpectralField laplacian(const SpectralField& f) {
  return f.multiply([](double a, double b) { return cplx(-(a * a + b * b)); }, true);
}

/// d = Lambda^-1 div u, c = Lambda^-1 curl u.
inline HelmholtzComponents helmholtz_decompose(const VectorField& u) {
  const double tol = 1e-14;
  double total = 0.0;
  for (int axis = 0; axis < 2; ++axis)
    for (const auto& c : u[axis].coeffs()) total += std::norm(c);
  const double scale = std::sqrt(total);
  if (std::abs(u.c1().zero_mode()) > tol * scale || std::abs(u.c2().zero_mode()) > tol * scale) {
    throw NonzeroMeanVelocity("helmholtz_decompose needs mean-free components");
  }
  return {lambda_pow(div(u), -1.0), lambda_pow(curl(u), -1.0)};
}

/// u = -Lambda^-1 grad d - Lambda^-1 perp_grad c.
inline VectorField helmholtz_reconstruct(const HelmholtzComponents& h) {
  const VectorField a = grad(lambda_pow(h.d, -1.0));
  const VectorField b = perp_grad(lambda_pow(h.c, -1.0));
  return -1.0 * (a + b);
}

/// Lattice-sum surrogate of the H^s (or homogeneous) norm.
inline double sobolev_norm_squared(const SpectralField& f, const NormParams& p) {
  const Grid& g = f.grid();
  const double h = g.spacing();
  double total = 0.0;
  for (std::size_t i1 = 0; i1 < g.n1(); ++i1) {
    const double a = g.xi1(i1);
    for (std::size_t i2 = 0; i2 < g.n2(); ++i2) {
      const double b = g.xi2(i2);
      const double r2 = a * a + b * b;
      const double c2 = std::norm(f[g.index(i1, i2)]);
      if (c2 == 0.0) continue;
      double w;
      if (p.homogeneous) {
        w = r2 == 0.0 ? (p.s == 0.0 ? 1.0 : 0.0) : std::pow(r2, p.s);
      } else {
        w = std::pow(1.0 + r2, p.s);
      }
      total += w * c2;
    }
  }
  return total * h * h;
}

inline double sobolev_norm(const SpectralField& f, const NormParams& p) { return std::sqrt(sobolev_norm_squared(f, p)); }

inline double sobolev_norm(const VectorField& u, const NormParams& p) {
  return std::sqrt(sobolev_norm_squared(u.c1(), p) + sobolev_norm_squared(u.c2(), p));
}

inline double sobolev_norm(const SpectralField& f, double s) { return sobolev_norm(f, NormParams{s, false}); }
inline double sobolev_norm(const VectorField& u, double s) { return sobolev_norm(u, NormParams{s, false}); }

/// sqrt(int |f|^2 dx) by the rectangle rule at the collocation points.
inline double physical_l2_norm(const SpectralField& f) {
  const auto phys = f.to_physical_complex();
  double total = 0.0;
  for (const auto& v : phys) total += std::norm(v);
  return std::sqrt(total * f.grid().cell_area());
}

inline double physical_min(const SpectralField& f) {
  double m = std::numeric_limits<double>::infinity();
  for (double v : f.to_physical()) m = std::min(m, v);
  return m;
}

inline double physical_max_abs(const SpectralField& f) {
  double m = 0.0;
  for (double v : f.to_physical()) m = std::max(m, std::abs(v));
  return m;
}

namespace detail {

inline SpectralField from_products(const Grid& grid, std::vector<cplx>& phys, bool real) {
  std::vector<cplx> spec(grid.size());
  forward_transform(grid, phys, spec);
  if (real) SpectralField::symmetrize(grid, spec);
  for (std::size_t i1 = 0; i1 < grid.n1(); ++i1)
    for (std::size_t i2 = 0; i2 < grid.n2(); ++i2)
      if (!grid.in_band(i1, i2)) spec[grid.index(i1, i2)] = 0.0;
  return SpectralField(grid, std::move(spec), real);
}

}  // namespace detail

/// Collocation product followed by 2/3-rule truncation.
inline SpectralField pointwise_product(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f.grid(), g.grid(), "pointwise_product");
  auto a = f.to_physical_complex();
  const auto b = g.to_physical_complex();
  const bool real = f.is_real() && g.is_real();
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] = real ? cplx(a[k].real() * b[k].real()) : a[k] * b[k];
  }
  return detail::from_products(f.grid(), a, real);
}

/// Applies a scalar map at the collocation points of a real field, then dealiases.
template <class Map>
SpectralField pointwise_map(const SpectralField& f, Map&& map) {
  if (!f.is_real()) throw DomainViolation("pointwise_map needs a real field");
  auto phys = f.to_physical_complex();
  for (std::size_t k = 0; k < phys.size(); ++k) {
    const double v = map(phys[k].real());
    if (!std::isfinite(v)) {
      throw DomainViolation("map returned " + std::to_string(v) + " at value " + std::to_string(phys[k].real()));
    }
    phys[k] = v;
  }
  return detail::from_products(f.grid(), phys, true);
}

/// ln(1 + f), refusing points where 1 + f <= floor.
inline SpectralField log_one_plus(const SpectralField& f, double floor = 1e-6) {
  return pointwise_map(f, [floor](double v) {
    if (!(1.0 + v > floor)) {
      throw DomainViolation("1 + f = " + std::to_string(1.0 + v) + " below floor " + std::to_string(floor));
    }
    return std::log1p(v);
  });
}

}  // namespace swnu
