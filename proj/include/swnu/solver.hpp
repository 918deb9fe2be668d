#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "swnu/errors.hpp"
#include "swnu/fft.hpp"
#include "swnu/field.hpp"
#include "swnu/grid.hpp"
#include "swnu/linear.hpp"
#include "swnu/operators.hpp"
#include "swnu/state.hpp"

namespace swnu {

struct SolverConfig {
  explicit SolverConfig(Grid g) : grid(std::move(g)) {}

  Grid grid;
  double mu = 1.0;
  double dt = 1e-3;
  double t_final = 0.0;
  std::size_t sample_stride = 1;
  std::vector<double> checkpoints;  // extra times at which full states are kept
  bool nonlinear = true;
  double c_cfl = 0.5;
  double delta_pos = 1e-6;
  double norm_index = 2.5;  // Sobolev index of the trajectory summaries

  void validate() const {
    if (!(dt > 0.0)) throw Error("solver: dt must be positive");
    if (!(t_final >= 0.0)) throw Error("solver: t_final must be non-negative");
    if (!(mu > 0.0)) throw Error("solver: mu must be positive");
    if (sample_stride == 0) throw Error("solver: sample stride must be positive");
    for (double c : checkpoints)
      if (!(c >= 0.0) || c > t_final * (1.0 + 1e-12)) throw Error("solver: checkpoint outside [0, t_final]");
  }
};

/// Norm summary of one state along a trajectory.
struct Sample {
  double t = 0.0;
  double rho_norm = 0.0;
  double u_norm = 0.0;
  double mass = 0.0;
  double min_density = 1.0;  // min over collocation points of 1 + rho
};

struct Trajectory {
  std::vector<Sample> samples;
  std::map<double, State> snapshots;  // checkpoint times and t_final

  const State& at(double t) const {
    auto it = snapshots.find(t);
    if (it == snapshots.end()) throw Error("trajectory: no snapshot at t = " + std::to_string(t));
    return it->second;
  }
};

namespace detail {

/// Scratch buffers and spectral multipliers for the nonlinear tendency on one grid.
class NonlinearWorkspace {
 public:
  explicit NonlinearWorkspace(const Grid& g) : grid_(g), n_(g.size()) {
    xi1_.resize(n_);
    xi2_.resize(n_);
    keep_.resize(n_);
    for (std::size_t i1 = 0; i1 < g.n1(); ++i1)
      for (std::size_t i2 = 0; i2 < g.n2(); ++i2) {
        const std::size_t k = g.index(i1, i2);
        xi1_[k] = g.xi1(i1);
        xi2_[k] = g.xi2(i2);
        keep_[k] = g.in_band(i1, i2) ? 1.0 : 0.0;
      }
    for (auto* v : {&s1_, &s2_, &s3_, &s4_, &s5_, &p1_, &p2_, &p3_, &p4_, &p5_, &a_, &b_}) v->resize(n_);
  }

  double last_min_density() const { return min_density_; }
  double last_max_speed() const { return max_speed_; }

  /// Tendency of the nonlinear terms:
  ///   N_rho = -div(rho u)
  ///   N_u   = -(u . grad) u + 2 grad ln(1 + rho) . D u
  /// `out_*` may not alias the inputs.
  void evaluate(const cplx* r, const cplx* u1, const cplx* u2, cplx* out_r, cplx* out_1, cplx* out_2,
                double delta_pos) {
    const cplx I(0.0, 1.0);
    // Pack pairs of real fields as f + i g so each inverse transform returns two of them.
    for (std::size_t k = 0; k < n_; ++k) {
      const cplx ix1 = I * xi1_[k], ix2 = I * xi2_[k];
      s1_[k] = r[k] + I * u1[k];
      s2_[k] = u2[k] + I * (ix1 * u1[k]);
      s3_[k] = ix2 * u1[k] + I * (ix1 * u2[k]);
      s4_[k] = ix2 * u2[k];
    }
    inverse_transform(grid_, s1_, p1_);  // rho, u1
    inverse_transform(grid_, s2_, p2_);  // u2, d1 u1
    inverse_transform(grid_, s3_, p3_);  // d2 u1, d1 u2
    inverse_transform(grid_, s4_, p4_);  // d2 u2

    double min_density = std::numeric_limits<double>::infinity();
    double max_speed = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
      const double rho = p1_[k].real(), v1 = p1_[k].imag(), v2 = p2_[k].real();
      const double h = 1.0 + rho;
      min_density = std::min(min_density, h);
      max_speed = std::max(max_speed, std::hypot(v1, v2));
      s1_[k] = cplx(std::log(std::max(h, delta_pos)), rho * v1);
      s2_[k] = rho * v2;
    }
    min_density_ = min_density;
    max_speed_ = max_speed;
    if (!(min_density > delta_pos)) {
      throw NonPositiveDensity("min(1 + rho) = " + std::to_string(min_density) + " at or below " +
                               std::to_string(delta_pos));
    }
    forward_transform(grid_, s1_, s5_);
    split_real_pair(grid_, s5_, a_, b_);  // a = ln(1 + rho)^, b = (rho u1)^
    forward_transform(grid_, s2_, s3_);   // (rho u2)^, not Hermitian-split: input is real

    for (std::size_t k = 0; k < n_; ++k) {
      const cplx ix1 = I * xi1_[k], ix2 = I * xi2_[k];
      const cplx q2 = 0.5 * (s3_[k] + std::conj(s3_[mirror_index(k)]));
      out_r[k] = -keep_[k] * (ix1 * b_[k] + ix2 * q2);
      const cplx ell = keep_[k] * a_[k];
      s4_[k] = ix1 * ell + I * (ix2 * ell);
    }
    inverse_transform(grid_, s4_, p5_);  // d1 l, d2 l

    for (std::size_t k = 0; k < n_; ++k) {
      const double v1 = p1_[k].imag(), v2 = p2_[k].real();
      const double d11 = p2_[k].imag(), d21 = p3_[k].real(), d12 = p3_[k].imag(), d22 = p4_[k].real();
      const double l1 = p5_[k].real(), l2 = p5_[k].imag();
      const double shear = d21 + d12;  // d2 u1 + d1 u2
      const double n1 = -(v1 * d11 + v2 * d21) + l1 * (2.0 * d11) + l2 * shear;
      const double n2 = -(v1 * d12 + v2 * d22) + l1 * shear + l2 * (2.0 * d22);
      s1_[k] = cplx(n1, n2);
    }
    forward_transform(grid_, s1_, s5_);
    split_real_pair(grid_, s5_, a_, b_);
    for (std::size_t k = 0; k < n_; ++k) {
      out_1[k] = keep_[k] * a_[k];
      out_2[k] = keep_[k] * b_[k];
    }
  }

 private:
  std::size_t mirror_index(std::size_t k) const { return grid_.mirror(k / grid_.n2(), k % grid_.n2()); }

  Grid grid_;
  std::size_t n_;
  std::vector<double> xi1_, xi2_, keep_;
  std::vector<cplx> s1_, s2_, s3_, s4_, s5_, p1_, p2_, p3_, p4_, p5_, a_, b_;
  double min_density_ = 1.0;
  double max_speed_ = 0.0;
};

}  // namespace detail

/// Nonlinear part of the tendency of the full system; the linear part is left to the propagator.
inline State rhs_nonlinear(const State& st, double mu, double delta_pos = 1e-6) {
  (void)mu;
  const Grid& g = st.grid();
  detail::NonlinearWorkspace ws(g);
  detail::RawState in(st);
  detail::RawState out(st);
  ws.evaluate(in.rho.data(), in.u1.data(), in.u2.data(), out.rho.data(), out.u1.data(), out.u2.data(), delta_pos);
  return out.to_state(g, true);
}

/// Lawson fourth-order Runge-Kutta with the exact linear semigroup as integrating factor.
class LawsonRK4 {
 public:
  explicit LawsonRK4(const SolverConfig& cfg)
      : cfg_(cfg), full_(cfg.grid, cfg.mu, cfg.dt), half_(cfg.grid, cfg.mu, 0.5 * cfg.dt), ws_(cfg.grid) {
    cfg.validate();
    const std::size_t n = cfg.grid.size();
    for (auto* v : {&k1_, &k2_, &k3_, &k4_, &y_, &e_}) v->resize(3 * n);
  }

  const SolverConfig& config() const { return cfg_; }
  double last_min_density() const { return ws_.last_min_density(); }

  /// Advances the packed state (rho, u1, u2 back to back) by cfg.dt in place.
  void step(std::vector<cplx>& u) { step_with(u, cfg_.dt, full_, half_); }

  /// One step of arbitrary size h (used for checkpoints between grid times).
  void step(std::vector<cplx>& u, double h) {
    if (h == cfg_.dt) return step(u);
    const KernelTable full(cfg_.grid, cfg_.mu, h), half(cfg_.grid, cfg_.mu, 0.5 * h);
    step_with(u, h, full, half);
  }

 private:
  void rhs(const std::vector<cplx>& u, std::vector<cplx>& out) {
    const std::size_t n = cfg_.grid.size();
    if (!cfg_.nonlinear) {
      std::fill(out.begin(), out.end(), cplx(0.0));
      return;
    }
    ws_.evaluate(u.data(), u.data() + n, u.data() + 2 * n, out.data(), out.data() + n, out.data() + 2 * n,
                 cfg_.delta_pos);
  }

  static void propagate(const KernelTable& t, std::vector<cplx>& v) {
    const std::size_t n = t.grid().size();
    t.apply(std::span(v.data(), n), std::span(v.data() + n, n), std::span(v.data() + 2 * n, n));
  }

  void check_cfl(double h) const {
    const double speed = ws_.last_max_speed();
    const double dx = std::min(cfg_.grid.dx(0), cfg_.grid.dx(1));
    if (speed > 0.0 && h > cfg_.c_cfl * dx / speed) {
      throw CflViolation("dt = " + std::to_string(h) + " exceeds " + std::to_string(cfg_.c_cfl) + " dx / max|u| = " +
                         std::to_string(cfg_.c_cfl * dx / speed));
    }
  }

  void step_with(std::vector<cplx>& u, double h, const KernelTable& full, const KernelTable& half) {
    const std::size_t m = u.size();
    rhs(u, k1_);
    if (cfg_.nonlinear) check_cfl(h);
    // k2 = N(E_{h/2}(u + h/2 k1))
    for (std::size_t k = 0; k < m; ++k) y_[k] = u[k] + 0.5 * h * k1_[k];
    propagate(half, y_);
    rhs(y_, k2_);
    // e = E_{h/2} u, k3 = N(e + h/2 k2)
    e_ = u;
    propagate(half, e_);
    for (std::size_t k = 0; k < m; ++k) y_[k] = e_[k] + 0.5 * h * k2_[k];
    rhs(y_, k3_);
    // k4 = N(E_h u + h E_{h/2} k3)
    y_ = k3_;
    propagate(half, y_);
    propagate(full, u);  // u now holds E_h u
    for (std::size_t k = 0; k < m; ++k) y_[k] = u[k] + h * y_[k];
    rhs(y_, k4_);
    // u_new = E_h u + h/6 (E_h k1 + 2 E_{h/2}(k2 + k3) + k4)
    propagate(full, k1_);
    for (std::size_t k = 0; k < m; ++k) k2_[k] += k3_[k];
    propagate(half, k2_);
    for (std::size_t k = 0; k < m; ++k) u[k] += (h / 6.0) * (k1_[k] + 2.0 * k2_[k] + k4_[k]);
  }

  SolverConfig cfg_;
  KernelTable full_, half_;
  detail::NonlinearWorkspace ws_;
  std::vector<cplx> k1_, k2_, k3_, k4_, y_, e_;
};

namespace detail {

inline std::vector<cplx> pack(const State& st) {
  const std::size_t n = st.grid().size();
  std::vector<cplx> v(3 * n);
  std::copy(st.rho.coeffs().begin(), st.rho.coeffs().end(), v.begin());
  std::copy(st.u.c1().coeffs().begin(), st.u.c1().coeffs().end(), v.begin() + n);
  std::copy(st.u.c2().coeffs().begin(), st.u.c2().coeffs().end(), v.begin() + 2 * n);
  return v;
}

inline State unpack(const Grid& g, const std::vector<cplx>& v) {
  const std::size_t n = g.size();
  auto field = [&](std::size_t off) {
    return SpectralField(g, std::vector<cplx>(v.begin() + off, v.begin() + off + n), true);
  };
  return State{field(0), VectorField(field(n), field(2 * n))};
}

inline Sample summarize(const State& st, double t, double s) {
  Sample smp;
  smp.t = t;
  smp.rho_norm = sobolev_norm(st.rho, s);
  smp.u_norm = sobolev_norm(st.u, s);
  smp.mass = st.rho.zero_mode().real();
  smp.min_density = 1.0 + physical_min(st.rho);
  return smp;
}

}  // namespace detail

/// One step of size cfg.dt.
inline State step(const State& st, const SolverConfig& cfg) {
  require_same_grid(st.grid(), cfg.grid, "step");
  LawsonRK4 rk(cfg);
  auto v = detail::pack(st);
  rk.step(v);
  return detail::unpack(cfg.grid, v);
}

/// Integrates from t = 0 to cfg.t_final on the fixed grid t_k = k dt. Checkpoints that fall
/// between grid times are reached by a partial step branched off the stored state, so the
/// main sequence never depends on which checkpoints were requested.
inline Trajectory integrate(const State& st0, const SolverConfig& cfg) {
  cfg.validate();
  require_same_grid(st0.grid(), cfg.grid, "integrate");
  if (!st0.rho.is_real() || !st0.u.is_real()) throw RealityViolation("integrate needs real initial data");
  LawsonRK4 rk(cfg);
  Trajectory traj;
  std::vector<double> targets = cfg.checkpoints;
  targets.push_back(cfg.t_final);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  const double tol = 1e-9 * cfg.dt;
  auto v = detail::pack(st0);
  std::size_t next = 0;
  std::size_t k = 0;
  auto record_exact = [&](double t) {
    while (next < targets.size() && std::abs(targets[next] - t) <= tol) {
      traj.snapshots.emplace(targets[next], detail::unpack(cfg.grid, v));
      ++next;
    }
  };
  traj.samples.push_back(detail::summarize(st0, 0.0, cfg.norm_index));
  record_exact(0.0);
  while (next < targets.size()) {
    const double t = static_cast<double>(k) * cfg.dt;
    const double t_next = static_cast<double>(k + 1) * cfg.dt;
    while (next < targets.size() && targets[next] < t_next - tol) {
      auto branch = v;
      rk.step(branch, targets[next] - t);
      traj.snapshots.emplace(targets[next], detail::unpack(cfg.grid, branch));
      ++next;
    }
    if (next >= targets.size()) break;
    rk.step(v);
    ++k;
    const bool sample = k % cfg.sample_stride == 0;
    const bool hits = std::abs(targets[next] - t_next) <= tol;
    if (sample || hits) {
      const State st = detail::unpack(cfg.grid, v);
      if (sample) traj.samples.push_back(detail::summarize(st, t_next, cfg.norm_index));
      record_exact(t_next);
    }
  }
  if (traj.samples.back().t < cfg.t_final - tol) {
    traj.samples.push_back(detail::summarize(traj.at(cfg.t_final), cfg.t_final, cfg.norm_index));
  }
  return traj;
}

inline void write_jsonl(std::ostream& os, const Trajectory& traj) {
  for (const auto& s : traj.samples) {
    nlohmann::json j{{"t", s.t}, {"rho_norm", s.rho_norm}, {"u_norm", s.u_norm}, {"mass", s.mass},
                     {"min_density", s.min_density}};
    os << j.dump() << '\n';
  }
}

/// Observed temporal order from runs at dt, dt/2, dt/4.
struct ProbeResult {
  double dt = 0.0;
  std::vector<double> errors;  // successive differences, or distances to the reference
  double order = 0.0;
  bool floor = false;          // error did not shrink with dt (aliasing- or round-off-dominated)
  bool machine_level = false;  // every error at round-off level
};

inline ProbeResult convergence_probe(const State& st0, const SolverConfig& cfg,
                                     const std::optional<State>& reference = std::nullopt) {
  ProbeResult res;
  res.dt = cfg.dt;
  std::vector<State> finals;
  for (int level = 0; level < 3; ++level) {
    SolverConfig c = cfg;
    c.dt = cfg.dt / std::ldexp(1.0, level);
    c.checkpoints.clear();
    c.sample_stride = std::numeric_limits<std::size_t>::max();
    finals.push_back(integrate(st0, c).at(cfg.t_final));
  }
  const double s = cfg.norm_index;
  const double scale = std::max(state_norm(finals.back(), s), std::numeric_limits<double>::min());
  if (reference) {
    for (const auto& f : finals) res.errors.push_back(state_norm(f.resampled(reference->grid()) - *reference, s));
  } else {
    res.errors.push_back(state_norm(finals[0] - finals[1], s));
    res.errors.push_back(state_norm(finals[1] - finals[2], s));
  }
  const std::size_t m = res.errors.size();
  const double a = res.errors[m - 2], b = res.errors[m - 1];
  res.machine_level = std::all_of(res.errors.begin(), res.errors.end(), [&](double e) { return e <= 1e-12 * scale; });
  res.order = (a > 0.0 && b > 0.0) ? std::log2(a / b) : 0.0;
  res.floor = res.machine_level || res.order < 1.0;
  return res;
}

}  // namespace swnu
