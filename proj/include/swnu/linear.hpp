#pragma once

#include <cmath>
#include <complex>
#include <iomanip>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "swnu/errors.hpp"
#include "swnu/field.hpp"
#include "swnu/grid.hpp"
#include "swnu/initial_data.hpp"
#include "swnu/operators.hpp"
#include "swnu/state.hpp"

namespace swnu {

/// Relative width of the band around lambda_+ = lambda_- where the kernels switch to series.
inline constexpr double kConfluentTolerance = 1e-3;

/// Eigen-data of the per-mode matrix A = [[0, -|xi|], [|xi|, -2 mu |xi|^2]].
struct EigenMode {
  double xi_norm = 0.0;
  double mu = 1.0;
  cplx lambda_plus;
  cplx lambda_minus;
  double disc = 0.0;  // mu^2 |xi|^4 - |xi|^2
  bool near_degenerate = false;

  /// sqrt(disc), real or imaginary; lambda_pm = -mu |xi|^2 +- omega.
  cplx omega() const { return 0.5 * (lambda_plus - lambda_minus); }
};

inline EigenMode eigen(double xi_norm, double mu) {
  if (!(mu > 0.0)) throw Error("eigen: mu must be positive");
  if (!(xi_norm >= 0.0)) throw Error("eigen: |xi| must be non-negative");
  EigenMode e;
  e.xi_norm = xi_norm;
  e.mu = mu;
  const double r2 = xi_norm * xi_norm;
  const double m = -mu * r2;
  // disc = r2 (mu r - 1)(mu r + 1), factored so the sign flip at mu r = 1 is exact.
  const double a = mu * xi_norm;
  e.disc = r2 * (a - 1.0) * (a + 1.0);
  e.near_degenerate = std::abs(e.disc) <= kConfluentTolerance * m * m;
  if (xi_norm == 0.0) {
    e.lambda_plus = e.lambda_minus = 0.0;
  } else if (e.disc >= 0.0) {
    const double w = xi_norm * std::sqrt((a - 1.0) * (a + 1.0));
    const double lm = m - w;
    e.lambda_minus = lm;
    e.lambda_plus = r2 / lm;  // product of the roots is |xi|^2
  } else {
    const double w = xi_norm * std::sqrt((1.0 - a) * (1.0 + a));
    e.lambda_plus = cplx(m, w);
    e.lambda_minus = cplx(m, -w);
  }
  return e;
}

/// (e^{a t} - e^{b t}) / (a - b), with the Taylor form of the divided difference when (a - b) t is small.
inline cplx exp_divided_difference(cplx a, cplx b, double t) {
  const cplx d = a - b;
  if (std::abs(d) * t < kConfluentTolerance) {
    const cplx mid = 0.5 * (a + b);
    const cplx z = 0.25 * d * d * t * t;
    return std::exp(mid * t) * t * (1.0 + z / 6.0 * (1.0 + z / 20.0 * (1.0 + z / 42.0)));
  }
  return (std::exp(a * t) - std::exp(b * t)) / d;
}

/// Entries of exp(tA) = P_rr I + Phi A, together with the rotational heat factor.
struct PropagatorKernels {
  double p_rr = 1.0;
  double phi = 0.0;
  double p_dd = 1.0;
  double heat = 1.0;
  bool series = false;
};

inline PropagatorKernels kernels(const EigenMode& e, double t) {
  if (!(t >= 0.0)) throw Error("kernels: t must be non-negative");
  PropagatorKernels k;
  const double r2 = e.xi_norm * e.xi_norm;
  const double m = -e.mu * r2;
  k.heat = std::exp(m * t);
  const double gap = 2.0 * std::abs(e.omega()) * t;  // |lambda_+ - lambda_-| t
  if (gap < kConfluentTolerance) {
    // sinh(w t)/w and cosh(w t) through z^3, z = (w t)^2 = disc t^2.
    const double z = e.disc * t * t;
    const double sh = t * (1.0 + z / 6.0 * (1.0 + z / 20.0 * (1.0 + z / 42.0)));
    const double ch = 1.0 + z / 2.0 * (1.0 + z / 12.0 * (1.0 + z / 30.0));
    const double em = std::exp(m * t);
    k.phi = em * sh;
    k.p_rr = em * (ch - m * sh);
    k.p_dd = em * (ch + m * sh);
    k.series = true;
    return k;
  }
  if (e.disc > 0.0) {
    const double lp = e.lambda_plus.real();
    const double lm = e.lambda_minus.real();
    const double w2 = lp - lm;
    const double ep = std::exp(lp * t);
    const double em = std::exp(lm * t);
    k.phi = -ep * std::expm1(-w2 * t) / w2;
    k.p_rr = ep - lp * k.phi;
    k.p_dd = (lp * ep - lm * em) / w2;
    return k;
  }
  const cplx lp = e.lambda_plus;
  const cplx lm = e.lambda_minus;
  const cplx ep = std::exp(lp * t);
  const cplx em = std::exp(lm * t);
  const cplx d = lp - lm;
  const cplx phi = exp_divided_difference(lp, lm, t);
  const cplx prr = (lp * em - lm * ep) / d;
  const cplx pdd = (lp * ep - lm * em) / d;
  const double residue = std::max({std::abs(phi.imag()) / std::max(std::abs(phi), 1e-300),
                                   std::abs(prr.imag()) / std::max(std::abs(prr), 1e-300),
                                   std::abs(pdd.imag()) / std::max(std::abs(pdd), 1e-300)});
  if (residue > 1e-12) throw Error("kernels: imaginary residue " + std::to_string(residue));
  k.phi = phi.real();
  k.p_rr = prr.real();
  k.p_dd = pdd.real();
  return k;
}

/// Per-mode kernel values for one grid, viscosity and time, ready to apply.
class KernelTable {
 public:
  KernelTable(const Grid& grid, double mu, double t) : grid_(grid), mu_(mu), t_(t) {
    const std::size_t n = grid.size();
    p_rr_.resize(n);
    k_.resize(n);
    p_dd_.resize(n);
    heat_.resize(n);
    e1_.resize(n);
    e2_.resize(n);
    for (std::size_t i1 = 0; i1 < grid.n1(); ++i1) {
      const double a = grid.xi1(i1);
      for (std::size_t i2 = 0; i2 < grid.n2(); ++i2) {
        const double b = grid.xi2(i2);
        const std::size_t idx = grid.index(i1, i2);
        const double r = std::hypot(a, b);
        const auto kk = kernels(eigen(r, mu), t);
        p_rr_[idx] = kk.p_rr;
        k_[idx] = r * kk.phi;
        p_dd_[idx] = kk.p_dd;
        heat_[idx] = kk.heat;
        e1_[idx] = r == 0.0 ? 0.0 : a / r;
        e2_[idx] = r == 0.0 ? 0.0 : b / r;
      }
    }
  }

  const Grid& grid() const { return grid_; }
  double mu() const { return mu_; }
  double time() const { return t_; }

  /// In-place exp(tL) on raw coefficient arrays.
  void apply(std::span<cplx> rho, std::span<cplx> u1, std::span<cplx> u2) const {
    const std::size_t n = p_rr_.size();
    for (std::size_t k = 0; k < n; ++k) {
      const double a = e1_[k], b = e2_[k];
      const cplx r = rho[k];
      const cplx v1 = u1[k], v2 = u2[k];
      const cplx along = a * v1 + b * v2;  // e . u
      const cplx iK = cplx(0.0, k_[k]);
      rho[k] = p_rr_[k] * r - iK * along;
      const cplx comp = p_dd_[k] * along - iK * r;
      const double h = heat_[k];
      u1[k] = a * comp + h * (v1 - a * along);
      u2[k] = b * comp + h * (v2 - b * along);
    }
  }

 private:
  Grid grid_;
  double mu_;
  double t_;
  std::vector<double> p_rr_, k_, p_dd_, heat_, e1_, e2_;
};

namespace detail {

struct RawState {
  std::vector<cplx> rho, u1, u2;

  explicit RawState(const State& st)
      : rho(st.rho.coeffs().begin(), st.rho.coeffs().end()),
        u1(st.u.c1().coeffs().begin(), st.u.c1().coeffs().end()),
        u2(st.u.c2().coeffs().begin(), st.u.c2().coeffs().end()) {}

  State to_state(const Grid& g, bool real) const {
    return State{SpectralField(g, rho, real), VectorField(SpectralField(g, u1, real), SpectralField(g, u2, real))};
  }
};

}  // namespace detail

/// The linear semigroup exp(tL) on one grid at one time.
class LinearPropagator {
 public:
  LinearPropagator(const Grid& grid, double mu, double t) : table_(grid, mu, t) {}

  State apply(const State& st) const {
    require_same_grid(st.grid(), table_.grid(), "linear propagator");
    detail::RawState raw(st);
    table_.apply(raw.rho, raw.u1, raw.u2);
    return raw.to_state(st.grid(), st.rho.is_real() && st.u.is_real());
  }

  const KernelTable& table() const { return table_; }

 private:
  KernelTable table_;
};

/// Exact solution of the linearised system at time t.
inline State evolve_linear(const State& st0, double mu, double t) {
  if (t == 0.0) return st0;
  return LinearPropagator(st0.grid(), mu, t).apply(st0);
}

/// Right-hand side of the linearised system: (-div u, mu Lap u + mu grad div u - grad rho).
inline State linear_rhs(const State& st, double mu) {
  const SpectralField d = div(st.u);
  const VectorField gd = grad(d);
  const VectorField gr = grad(st.rho);
  return State{-d, VectorField(mu * laplacian(st.u.c1()) + mu * gd.c1() - gr.c1(),
                               mu * laplacian(st.u.c2()) + mu * gd.c2() - gr.c2())};
}

/// d/dt of evolve_linear, obtained by applying the generator to the evolved state.
inline State time_derivative_linear(const State& st0, double mu, double t) {
  return linear_rhs(evolve_linear(st0, mu, t), mu);
}

/// -(u . grad rho), dealiased.
inline SpectralField transport_term(const State& st) {
  const VectorField g = grad(st.rho);
  return -(pointwise_product(st.u.c1(), g.c1()) + pointwise_product(st.u.c2(), g.c2()));
}

/// V_n^ap = -(u^ap_2 . grad rho^ap_2) from the linear evolution of the second family at time t.
inline SpectralField v_ap(const DataFamilyParams& p, const Grid& grid, double mu, double t) {
  return transport_term(evolve_linear(initial_pair(p, grid, Family::second), mu, t));
}

/// CSV rows (|xi|, lambda_+, lambda_-, kernels at t) for debugging.
inline void write_kernel_csv(std::ostream& os, std::span<const double> xi_norms, double mu, double t) {
  os << "xi_norm,lambda_plus_re,lambda_plus_im,lambda_minus_re,lambda_minus_im,p_rr,phi,p_dd,heat,series\n";
  os << std::setprecision(17);
  for (double r : xi_norms) {
    const auto e = eigen(r, mu);
    const auto k = kernels(e, t);
    os << r << ',' << e.lambda_plus.real() << ',' << e.lambda_plus.imag() << ',' << e.lambda_minus.real() << ','
       << e.lambda_minus.imag() << ',' << k.p_rr << ',' << k.phi << ',' << k.p_dd << ',' << k.heat << ','
       << (k.series ? 1 : 0) << '\n';
  }
}

}  // namespace swnu
