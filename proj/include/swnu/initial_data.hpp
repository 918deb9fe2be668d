#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "swnu/errors.hpp"
#include "swnu/field.hpp"
#include "swnu/grid.hpp"
#include "swnu/operators.hpp"
#include "swnu/state.hpp"

namespace swnu {

/// Smooth radial cutoff: equal to 1 on [0, 1/4], 0 beyond 1/2, with an
/// exponential partition-of-unity transition in between.
class BumpProfile {
 public:
  static constexpr double plateau_radius = 0.25;
  static constexpr double support_radius = 0.5;

  /// h(1-t) / (h(t) + h(1-t)) with h(t) = exp(-1/t) for t > 0.
  static double transition(double t) {
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / (1.0 - t));
    const double b = std::exp(-1.0 / t);
    return a / (a + b);
  }

  double hat(double r) const {
    r = std::abs(r);
    return transition((r - plateau_radius) / (support_radius - plateau_radius));
  }

  double hat(double a, double b) const { return hat(a) * hat(b); }

  /// 1D inverse transform phi(x) = (1/pi) int_0^{1/2} phi^(xi) cos(x xi) dxi.
  double physical(double x) const {
    return integrate([&](double xi) { return hat(xi) * std::cos(x * xi); }) / std::numbers::pi;
  }

  /// phi'(x) = -(1/pi) int_0^{1/2} xi phi^(xi) sin(x xi) dxi.
  double physical_derivative(double x) const {
    return -integrate([&](double xi) { return xi * hat(xi) * std::sin(x * xi); }) / std::numbers::pi;
  }

 private:
  // Composite 20-point Gauss-Legendre on [0, 1/2], split at the plateau edge.
  template <class F>
  static double integrate(F&& f) {
    using Q = boost::math::quadrature::gauss<double, 20>;
    constexpr int pieces = 64;
    double total = 0.0;
    for (int part = 0; part < 2; ++part) {
      const double a = part == 0 ? 0.0 : plateau_radius;
      const double w = (part == 0 ? plateau_radius : support_radius - plateau_radius) / pieces;
      for (int k = 0; k < pieces; ++k) total += Q::integrate(f, a + k * w, a + (k + 1) * w);
    }
    return total;
  }
};

inline BumpProfile make_bump() { return BumpProfile{}; }

/// Frequency exponent n and Sobolev index s of one member of the data family.
struct DataFamilyParams {
  int n = 4;
  double s = 2.5;

  DataFamilyParams() = default;
  DataFamilyParams(int n_, double s_) : n(n_), s(s_) {
    if (n_ < 1) throw Error("data family: n must be positive");
    if (!(s_ > 2.0)) throw Error("data family: s must exceed 2");
  }

  double eps_s() const { return 0.5 * (s - 2.0); }
  double s_prime() const { return s - eps_s(); }
  double carrier() const { return std::ldexp(1.0, n); }
};

enum class Family { first = 1, second = 2 };

/// Checks that every mode with |xi_1| <= xi1_max and |xi_2| <= xi2_max survives dealiasing.
inline void require_band(const Grid& g, double xi1_max, double xi2_max, const std::string& what) {
  if (!(xi1_max < g.band_radius(0)) || !(xi2_max < g.band_radius(1))) {
    throw FrequencyOverflow(what + " needs |xi| up to (" + std::to_string(xi1_max) + ", " + std::to_string(xi2_max) +
                            ") but the grid " + g.describe() + " keeps (" + std::to_string(g.band_radius(0)) + ", " +
                            std::to_string(g.band_radius(1)) + ")");
  }
}

/// f_n = 2^{-ns} phi(x1) sin(2^n x1) phi(x2), synthesised from its transform.
inline SpectralField make_fn(const DataFamilyParams& p, const Grid& g) {
  require_band(g, p.carrier() + 1.0, BumpProfile::support_radius, "f_n");
  const BumpProfile bump;
  const double amp = std::exp2(-p.n * p.s);
  const double c = p.carrier();
  std::vector<cplx> coeffs(g.size());
  for (std::size_t i1 = 0; i1 < g.n1(); ++i1) {
    const double a = g.xi1(i1);
    const double bracket = bump.hat(a + c) - bump.hat(a - c);
    if (bracket == 0.0) continue;
    for (std::size_t i2 = 0; i2 < g.n2(); ++i2) {
      coeffs[g.index(i1, i2)] = cplx(0.0, 0.5 * amp * bracket * bump.hat(g.xi2(i2)));
    }
  }
  return SpectralField(g, std::move(coeffs), true);
}

/// g_n = 2^{-n} grad(phi(x1) phi(x2)).
inline VectorField make_gn(const DataFamilyParams& p, const Grid& g) {
  require_band(g, BumpProfile::support_radius, BumpProfile::support_radius, "g_n");
  const BumpProfile bump;
  const double amp = std::exp2(-p.n);
  std::vector<cplx> c1(g.size()), c2(g.size());
  for (std::size_t i1 = 0; i1 < g.n1(); ++i1) {
    const double a = g.xi1(i1);
    for (std::size_t i2 = 0; i2 < g.n2(); ++i2) {
      const double b = g.xi2(i2);
      const double w = amp * bump.hat(a, b);
      c1[g.index(i1, i2)] = cplx(0.0, a * w);
      c2[g.index(i1, i2)] = cplx(0.0, b * w);
    }
  }
  return VectorField(SpectralField(g, std::move(c1), true), SpectralField(g, std::move(c2), true));
}

/// (rho, u)(0) = (f_n, 0) for the first family, (f_n, g_n) for the second.
inline State initial_pair(const DataFamilyParams& p, const Grid& g, Family which) {
  auto rho = make_fn(p, g);
  if (which == Family::first) return State{std::move(rho), VectorField::zeros(g)};
  return State{std::move(rho), make_gn(p, g)};
}

}  // namespace swnu
