#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "swnu/errors.hpp"
#include "swnu/fft.hpp"
#include "swnu/grid.hpp"

namespace swnu {

/// One scalar field on a periodic grid, held as Fourier coefficients.
///
/// coeffs(xi) approximates the continuum transform  f^(xi) = int e^{-i x.xi} f(x) dx,
/// i.e. the unnormalised DFT times the cell area. Nyquist rows are forced to
/// zero. A field flagged real must satisfy coeffs(-xi) = conj(coeffs(xi)); the
/// constructor checks it.
class SpectralField {
 public:
  static constexpr double kRealityTolerance = 1e-12;

  SpectralField(Grid grid, std::vector<cplx> coeffs, bool is_real)
      : grid_(std::move(grid)), coeffs_(std::move(coeffs)), real_(is_real) {
    if (coeffs_.size() != grid_.size()) {
      throw Error("spectral field: expected " + std::to_string(grid_.size()) + " coefficients, got " +
                  std::to_string(coeffs_.size()));
    }
    zero_nyquist();
    if (real_) check_conjugate_symmetry();
  }

  static SpectralField zeros(const Grid& grid, bool is_real = true) {
    return SpectralField(grid, std::vector<cplx>(grid.size()), is_real);
  }

  /// Samples f at the collocation points; `f(x1, x2)` must be real-valued.
  template <class F>
  static SpectralField from_function(const Grid& grid, F&& f) {
    std::vector<cplx> phys(grid.size());
    for (std::size_t j1 = 0; j1 < grid.n1(); ++j1)
      for (std::size_t j2 = 0; j2 < grid.n2(); ++j2) phys[grid.index(j1, j2)] = f(grid.x1(j1), grid.x2(j2));
    return from_physical(grid, phys);
  }

  static SpectralField from_physical(const Grid& grid, std::span<const double> values) {
    std::vector<cplx> phys(values.begin(), values.end());
    return from_physical(grid, phys);
  }

  static SpectralField from_physical(const Grid& grid, std::span<const cplx> values) {
    if (values.size() != grid.size()) throw Error("from_physical: size mismatch");
    std::vector<cplx> phys(values.size());
    bool real = true;
    for (std::size_t k = 0; k < values.size(); ++k) {
      phys[k] = values[k];
      if (values[k].imag() != 0.0) real = false;
    }
    std::vector<cplx> spec(grid.size());
    forward_transform(grid, phys, spec);
    if (real) symmetrize(grid, spec);
    return SpectralField(grid, std::move(spec), real);
  }

  const Grid& grid() const { return grid_; }
  bool is_real() const { return real_; }
  std::span<const cplx> coeffs() const { return coeffs_; }
  const cplx& operator[](std::size_t k) const { return coeffs_[k]; }

  /// Coefficient at signed wavenumbers (k1, k2).
  cplx at(long k1, long k2) const { return coeffs_[grid_.index_of(k1, k2)]; }
  cplx zero_mode() const { return coeffs_[0]; }

  /// Values at the collocation points (real part; for real fields the
  /// imaginary residue is pure round-off).
  std::vector<double> to_physical() const {
    auto phys = to_physical_complex();
    std::vector<double> out(phys.size());
    for (std::size_t k = 0; k < phys.size(); ++k) out[k] = phys[k].real();
    return out;
  }

  std::vector<cplx> to_physical_complex() const {
    std::vector<cplx> phys(grid_.size());
    inverse_transform(grid_, coeffs_, phys);
    return phys;
  }

  /// Largest |coeffs(-xi) - conj(coeffs(xi))| relative to the largest coefficient.
  double conjugate_asymmetry() const {
    double worst = 0.0;
    double scale = 0.0;
    for (const auto& c : coeffs_) scale = std::max(scale, std::abs(c));
    if (scale == 0.0) return 0.0;
    for (std::size_t i1 = 0; i1 < grid_.n1(); ++i1)
      for (std::size_t i2 = 0; i2 < grid_.n2(); ++i2)
        worst = std::max(worst, std::abs(coeffs_[grid_.index(i1, i2)] - std::conj(coeffs_[grid_.mirror(i1, i2)])));
    return worst / scale;
  }

  /// Applies a per-mode multiplier m(xi1, xi2). `keeps_real` states whether
  /// m(-xi) = conj(m(xi)), so that real fields stay real.
  template <class M>
  SpectralField multiply(M&& m, bool keeps_real) const {
    std::vector<cplx> out(coeffs_.size());
    for (std::size_t i1 = 0; i1 < grid_.n1(); ++i1) {
      const double a = grid_.xi1(i1);
      for (std::size_t i2 = 0; i2 < grid_.n2(); ++i2) {
        const std::size_t k = grid_.index(i1, i2);
        out[k] = m(a, grid_.xi2(i2)) * coeffs_[k];
      }
    }
    return SpectralField(grid_, std::move(out), real_ && keeps_real);
  }

  /// Zeroes every mode outside the 2/3 band.
  SpectralField dealiased() const {
    std::vector<cplx> out(coeffs_);
    for (std::size_t i1 = 0; i1 < grid_.n1(); ++i1)
      for (std::size_t i2 = 0; i2 < grid_.n2(); ++i2)
        if (!grid_.in_band(i1, i2)) out[grid_.index(i1, i2)] = 0.0;
    return SpectralField(grid_, std::move(out), real_);
  }

  SpectralField operator-() const { return scaled(-1.0); }

  SpectralField scaled(double a) const {
    std::vector<cplx> out(coeffs_);
    for (auto& c : out) c *= a;
    return SpectralField(grid_, std::move(out), real_);
  }

  friend SpectralField operator+(const SpectralField& a, const SpectralField& b) { return a.combine(b, 1.0); }
  friend SpectralField operator-(const SpectralField& a, const SpectralField& b) { return a.combine(b, -1.0); }
  friend SpectralField operator*(double a, const SpectralField& f) { return f.scaled(a); }
  friend SpectralField operator*(const SpectralField& f, double a) { return f.scaled(a); }

  /// Copies the coefficients onto another grid with the same box length:
  /// shared modes are kept, the rest are zero (truncation or zero padding).
  SpectralField resampled(const Grid& target) const {
    if (target.box_length() != grid_.box_length()) throw GridMismatch("resample: box lengths differ");
    std::vector<cplx> out(target.size());
    for (std::size_t i1 = 0; i1 < grid_.n1(); ++i1) {
      const long k1 = grid_.k1(i1);
      if (2 * std::labs(k1) >= static_cast<long>(target.n1())) continue;
      for (std::size_t i2 = 0; i2 < grid_.n2(); ++i2) {
        const long k2 = grid_.k2(i2);
        if (2 * std::labs(k2) >= static_cast<long>(target.n2())) continue;
        out[target.index_of(k1, k2)] = coeffs_[grid_.index(i1, i2)];
      }
    }
    return SpectralField(target, std::move(out), real_);
  }

  /// Enforces exact conjugate symmetry by averaging each mode with its mirror.
  static void symmetrize(const Grid& grid, std::span<cplx> c) {
    for (std::size_t i1 = 0; i1 < grid.n1(); ++i1) {
      for (std::size_t i2 = 0; i2 < grid.n2(); ++i2) {
        const std::size_t k = grid.index(i1, i2);
        const std::size_t m = grid.mirror(i1, i2);
        if (m < k) continue;
        const cplx avg = 0.5 * (c[k] + std::conj(c[m]));
        c[k] = avg;
        c[m] = std::conj(avg);
      }
    }
  }

 private:
  SpectralField combine(const SpectralField& b, double sign) const {
    require_same_grid(grid_, b.grid_, "field arithmetic");
    std::vector<cplx> out(coeffs_);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += sign * b.coeffs_[k];
    return SpectralField(grid_, std::move(out), real_ && b.real_);
  }

  void zero_nyquist() {
    const std::size_t h1 = grid_.n1() / 2;
    const std::size_t h2 = grid_.n2() / 2;
    for (std::size_t i2 = 0; i2 < grid_.n2(); ++i2) coeffs_[grid_.index(h1, i2)] = 0.0;
    for (std::size_t i1 = 0; i1 < grid_.n1(); ++i1) coeffs_[grid_.index(i1, h2)] = 0.0;
  }

  void check_conjugate_symmetry() const {
    const double asym = conjugate_asymmetry();
    if (asym > kRealityTolerance) {
      throw RealityViolation("field flagged real has conjugate asymmetry " + std::to_string(asym));
    }
  }

  Grid grid_;
  std::vector<cplx> coeffs_;
  bool real_;
};

/// Two-component field (u1, u2) on a shared grid.
class VectorField {
 public:
  VectorField(SpectralField c1, SpectralField c2) : c1_(std::move(c1)), c2_(std::move(c2)) {
    require_same_grid(c1_.grid(), c2_.grid(), "vector field");
  }

  static VectorField zeros(const Grid& grid) {
    return VectorField(SpectralField::zeros(grid), SpectralField::zeros(grid));
  }

  const SpectralField& c1() const { return c1_; }
  const SpectralField& c2() const { return c2_; }
  const SpectralField& operator[](int axis) const { return axis == 0 ? c1_ : c2_; }
  const Grid& grid() const { return c1_.grid(); }
  bool is_real() const { return c1_.is_real() && c2_.is_real(); }

  friend VectorField operator+(const VectorField& a, const VectorField& b) {
    return VectorField(a.c1_ + b.c1_, a.c2_ + b.c2_);
  }
  friend VectorField operator-(const VectorField& a, const VectorField& b) {
    return VectorField(a.c1_ - b.c1_, a.c2_ - b.c2_);
  }
  friend VectorField operator*(double a, const VectorField& v) { return VectorField(a * v.c1_, a * v.c2_); }

  VectorField resampled(const Grid& target) const {
    return VectorField(c1_.resampled(target), c2_.resampled(target));
  }

 private:
  SpectralField c1_;
  SpectralField c2_;
};

/// Compressible and rotational parts of a velocity field.
struct HelmholtzComponents {
  SpectralField d;
  SpectralField c;
};

/// Sobolev index and flavour for `sobolev_norm`.
struct NormParams {
  double s = 0.0;
  bool homogeneous = false;
};

}  // namespace swnu
