#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "swnu/grid.hpp"

namespace swnu {

using cplx = std::complex<double>;

namespace detail {

// FFTW planning is not thread-safe, execution with the new-array interface
// is. Plans are created once per shape under a lock and reused from any
// thread. FFTW_ESTIMATE keeps the chosen algorithm (and so every rounding
// pattern) identical from one process to the next.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t n1, std::size_t n2, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(n1, n2, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* in = fftw_alloc_complex(n1 * n2);
    auto* out = fftw_alloc_complex(n1 * n2);
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(n1), static_cast<int>(n2), in, out, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

inline fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
inline fftw_complex* as_fftw(const cplx* p) { return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(p)); }

}  // namespace detail

/// Physical samples -> coefficients in continuum Fourier-transform units.
inline void forward_transform(const Grid& grid, std::span<const cplx> physical, std::span<cplx> spectral) {
  auto plan = detail::PlanCache::instance().get(grid.n1(), grid.n2(), FFTW_FORWARD);
  fftw_execute_dft(plan, detail::as_fftw(physical.data()), detail::as_fftw(spectral.data()));
  const double scale = grid.cell_area();
  for (auto& c : spectral) c *= scale;
}

/// Coefficients in continuum units -> physical samples at the collocation points.
inline void inverse_transform(const Grid& grid, std::span<const cplx> spectral, std::span<cplx> physical) {
  auto plan = detail::PlanCache::instance().get(grid.n1(), grid.n2(), FFTW_BACKWARD);
  fftw_execute_dft(plan, detail::as_fftw(spectral.data()), detail::as_fftw(physical.data()));
  const double scale = 1.0 / (grid.box_length() * grid.box_length());
  for (auto& c : physical) c *= scale;
}

/// Splits Z = F(a + i b) of two real signals a, b into F(a) and F(b).
inline void split_real_pair(const Grid& grid, std::span<const cplx> packed, std::span<cplx> first,
                            std::span<cplx> second) {
  for (std::size_t i1 = 0; i1 < grid.n1(); ++i1) {
    for (std::size_t i2 = 0; i2 < grid.n2(); ++i2) {
      const std::size_t k = grid.index(i1, i2);
      const cplx z = packed[k];
      const cplx zm = std::conj(packed[grid.mirror(i1, i2)]);
      first[k] = 0.5 * (z + zm);
      second[k] = cplx(0.0, -0.5) * (z - zm);
    }
  }
}

}  // namespace swnu
