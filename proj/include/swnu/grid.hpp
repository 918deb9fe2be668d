#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <numbers>
#include <string>

#include "swnu/errors.hpp"

namespace swnu {

/// Periodic box [0, L)^2 sampled with n1 x n2 collocation points.
///
/// Both axes share the same period, so the frequency lattice has the
/// isotropic spacing 2*pi/L. Axis 1 (x1) is the slow index of the row-major
/// coefficient layout, axis 2 (x2) the fast one. Frequencies follow the FFT
/// ordering: index i maps to wavenumber i for i < n/2 and i - n otherwise.
class Grid {
 public:
  Grid(std::size_t n, double box_length) : Grid(n, n, box_length) {}

  Grid(std::size_t n1, std::size_t n2, double box_length)
      : n1_(n1), n2_(n2), box_length_(box_length) {
    if (!is_power_of_two(n1) || !is_power_of_two(n2) || n1 < 4 || n2 < 4) {
      throw Error("grid: points per dimension must be powers of two >= 4, got " +
                  std::to_string(n1) + " x " + std::to_string(n2));
    }
    if (!(box_length > 0.0) || !std::isfinite(box_length)) {
      throw Error("grid: box length must be positive and finite");
    }
  }

  std::size_t n1() const { return n1_; }
  std::size_t n2() const { return n2_; }
  std::size_t points(int axis) const { return axis == 0 ? n1_ : n2_; }
  std::size_t size() const { return n1_ * n2_; }
  double box_length() const { return box_length_; }

  /// Lattice spacing 2*pi/L of the frequency grid.
  double spacing() const { return 2.0 * std::numbers::pi / box_length_; }
  double dx(int axis) const { return box_length_ / static_cast<double>(points(axis)); }

  /// Largest representable frequency pi*N/L along an axis.
  double nyquist(int axis) const { return std::numbers::pi * static_cast<double>(points(axis)) / box_length_; }

  /// Radius of the retained 2/3-rule band along an axis.
  double band_radius(int axis) const { return (2.0 / 3.0) * nyquist(axis); }
  double band_radius() const { return std::min(band_radius(0), band_radius(1)); }

  static long wavenumber(std::size_t index, std::size_t n) {
    const auto i = static_cast<long>(index);
    const auto m = static_cast<long>(n);
    return i < m / 2 ? i : i - m;
  }
  long k1(std::size_t i1) const { return wavenumber(i1, n1_); }
  long k2(std::size_t i2) const { return wavenumber(i2, n2_); }
  double xi1(std::size_t i1) const { return spacing() * static_cast<double>(k1(i1)); }
  double xi2(std::size_t i2) const { return spacing() * static_cast<double>(k2(i2)); }

  std::size_t index(std::size_t i1, std::size_t i2) const { return i1 * n2_ + i2; }

  /// Storage index of the wavenumber pair (k1, k2); both must lie in range.
  std::size_t index_of(long k1, long k2) const {
    const auto m1 = static_cast<long>(n1_);
    const auto m2 = static_cast<long>(n2_);
    return index(static_cast<std::size_t>((k1 % m1 + m1) % m1), static_cast<std::size_t>((k2 % m2 + m2) % m2));
  }

  /// Index of the mirrored frequency -xi (Nyquist rows map onto themselves).
  std::size_t mirror(std::size_t i1, std::size_t i2) const {
    return index((n1_ - i1) % n1_, (n2_ - i2) % n2_);
  }

  bool is_nyquist(std::size_t i1, std::size_t i2) const {
    return i1 == n1_ / 2 || i2 == n2_ / 2;
  }

  /// 2/3 rule: a mode survives iff 3|k| < N on both axes.
  bool in_band(std::size_t i1, std::size_t i2) const {
    return 3 * std::labs(k1(i1)) < static_cast<long>(n1_) && 3 * std::labs(k2(i2)) < static_cast<long>(n2_);
  }

  double x1(std::size_t j1) const { return dx(0) * static_cast<double>(j1); }
  double x2(std::size_t j2) const { return dx(1) * static_cast<double>(j2); }

  /// Scale from unnormalised DFT sums to continuum Fourier-transform units.
  double cell_area() const { return dx(0) * dx(1); }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.n1_ == b.n1_ && a.n2_ == b.n2_ && a.box_length_ == b.box_length_;
  }

  std::string describe() const {
    return std::to_string(n1_) + "x" + std::to_string(n2_) + " L=" + std::to_string(box_length_);
  }

  static bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

  /// Smallest power of two n >= minimum whose 2/3 band strictly contains `frequency`.
  static std::size_t points_for_band(double frequency, double box_length, std::size_t minimum = 4) {
    std::size_t n = minimum;
    const double h = 2.0 * std::numbers::pi / box_length;
    while (static_cast<double>(n) * h / 3.0 <= frequency) n *= 2;
    return n;
  }

 private:
  std::size_t n1_;
  std::size_t n2_;
  double box_length_;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* op) {
  if (!(a == b)) throw GridMismatch(std::string(op) + ": " + a.describe() + " vs " + b.describe());
}

}  // namespace swnu
