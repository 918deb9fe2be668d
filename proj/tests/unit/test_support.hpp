#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "swnu/field.hpp"
#include "swnu/operators.hpp"

namespace swnu::testing {

/// Random real field whose modes all lie inside the 2/3 band, optionally mean-free.
inline SpectralField random_band_limited(const Grid& g, std::mt19937_64& rng, bool mean_free = true,
                                         double decay = 0.0) {
  std::normal_distribution<double> normal;
  std::vector<cplx> c(g.size());
  for (std::size_t i1 = 0; i1 < g.n1(); ++i1) {
    for (std::size_t i2 = 0; i2 < g.n2(); ++i2) {
      if (!g.in_band(i1, i2)) continue;
      const double r = std::hypot(g.xi1(i1), g.xi2(i2));
      c[g.index(i1, i2)] = cplx(normal(rng), normal(rng)) * std::exp(-decay * r);
    }
  }
  if (mean_free) c[0] = 0.0;
  SpectralField::symmetrize(g, c);
  return SpectralField(g, std::move(c), true);
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.grid().size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline double max_abs(const SpectralField& a) {
  double m = 0.0;
  for (const auto& c : a.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

inline double relative_l2(const SpectralField& a, const SpectralField& b) {
  return sobolev_norm(a - b, 0.0) / sobolev_norm(b, 0.0);
}

inline double relative_l2(const VectorField& a, const VectorField& b) {
  return sobolev_norm(a - b, 0.0) / sobolev_norm(b, 0.0);
}

}  // namespace swnu::testing
