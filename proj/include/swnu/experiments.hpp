#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "swnu/errors.hpp"
#include "swnu/field.hpp"
#include "swnu/fit.hpp"
#include "swnu/grid.hpp"
#include "swnu/initial_data.hpp"
#include "swnu/linear.hpp"
#include "swnu/operators.hpp"
#include "swnu/report.hpp"
#include "swnu/solver.hpp"
#include "swnu/state.hpp"

namespace swnu {

/// Fit-quality bound: a rate verdict can only pass if its RMS log2 residual is below this.
inline constexpr double kFitResidualBound = 0.1;

/// Every experiment is a pure function of this struct. See docs/config.md for the file schema.
struct ExperimentConfig {
  double s = 2.5;
  double mu = 1.0;
  int n_min = 3;
  int n_max = 7;
  std::optional<std::size_t> grid_n;  // overrides the x1 point count of every grid
  std::size_t grid_n2 = 32;           // x2 points of the nonlinear grid
  std::size_t linear_n2 = 16;         // x2 points of the linear-only grid
  double box_l = 16.0 * std::numbers::pi;
  double dt = 1e-3;
  double t_final = 0.5;
  std::size_t sample_stride = 50;
  std::vector<double> checkpoints{0.05, 0.0625, 0.1, 0.125, 0.2, 0.25, 0.4, 0.5};
  std::vector<double> c3_checkpoints{0.0625, 0.125, 0.25};
  std::vector<double> scaling_times{0.0, 0.25, 0.5, 1.0};
  int energy_steps = 16;  // energy balance checked at t = k / energy_steps, k = 1..energy_steps
  std::vector<double> prop2_monotone_times{0.05, 0.1, 0.2};
  double prop2_window_lo = 0.05;
  double prop2_window_hi = 0.4;
  int n0 = 5;
  double kappa_fraction = 0.5;
  std::string out_dir = "reports";
  std::string format = "json";

  void validate() const {
    if (!(s > 2.0)) throw Error("config: s must exceed 2");
    if (!(mu > 0.0)) throw Error("config: mu must be positive");
    if (n_min < 1 || n_max < n_min) throw Error("config: n range must be nonempty with n_min >= 1");
    if (!(dt > 0.0)) throw Error("config: dt must be positive");
    if (!(t_final >= 0.0) || t_final > 1.0) throw Error("config: t_final must lie in [0, 1]");
    if (!(box_l > 0.0)) throw Error("config: box length must be positive");
    if (sample_stride == 0) throw Error("config: sample stride must be positive");
    if (energy_steps < 1) throw Error("config: energy_steps must be positive");
    auto check = [&](const std::vector<double>& ts, double hi, const char* what) {
      for (double t : ts)
        if (!(t >= 0.0) || t > 1.0 || t > hi) {
          throw Error(std::string("config: ") + what + " time " + std::to_string(t) + " outside [0, " +
                      std::to_string(hi) + "]");
        }
    };
    check(checkpoints, t_final, "checkpoint");
    check(c3_checkpoints, t_final, "c3 checkpoint");
    check(prop2_monotone_times, t_final, "prop2 monotone");
    check(scaling_times, 1.0, "scaling");
    if (format != "json" && format != "csv") throw Error("config: format must be json or csv");
  }

  std::vector<int> ns() const {
    std::vector<int> v;
    for (int n = n_min; n <= n_max; ++n) v.push_back(n);
    return v;
  }

  double eps_s() const { return 0.5 * (s - 2.0); }

  /// Resolves f_n, and the 2^{n+1} harmonics generated by quadratic terms, without aliasing.
  Grid nonlinear_grid(int n) const {
    const std::size_t n1 = grid_n ? *grid_n : Grid::points_for_band(std::ldexp(1.0, n + 1) + 1.0, box_l);
    return Grid(n1, grid_n2, box_l);
  }

  /// Resolves f_n and single products with g_n.
  Grid linear_grid(int n) const {
    const std::size_t n1 = grid_n ? *grid_n : Grid::points_for_band(std::ldexp(1.0, n) + 1.0, box_l);
    return Grid(n1, linear_n2, box_l);
  }

  /// Checkpoints of the nonlinear runs: the union of every list the experiments read.
  std::vector<double> solver_checkpoints() const {
    std::set<double> all(checkpoints.begin(), checkpoints.end());
    all.insert(c3_checkpoints.begin(), c3_checkpoints.end());
    all.insert(prop2_monotone_times.begin(), prop2_monotone_times.end());
    all.insert(0.0);
    return {all.begin(), all.end()};
  }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["s"] = c.s;
  j["mu"] = c.mu;
  j["n_min"] = c.n_min;
  j["n_max"] = c.n_max;
  j["grid_n"] = c.grid_n ? nlohmann::json(*c.grid_n) : nlohmann::json(nullptr);
  j["grid_n2"] = c.grid_n2;
  j["linear_n2"] = c.linear_n2;
  j["box_l"] = c.box_l;
  j["dt"] = c.dt;
  j["t_final"] = c.t_final;
  j["sample_stride"] = c.sample_stride;
  j["checkpoints"] = c.checkpoints;
  j["c3_checkpoints"] = c.c3_checkpoints;
  j["scaling_times"] = c.scaling_times;
  j["energy_steps"] = c.energy_steps;
  j["prop2_monotone_times"] = c.prop2_monotone_times;
  j["prop2_window"] = {c.prop2_window_lo, c.prop2_window_hi};
  j["n0"] = c.n0;
  j["kappa_fraction"] = c.kappa_fraction;
  j["out_dir"] = c.out_dir;
  j["format"] = c.format;
  return j;
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c = {}) {
  if (!j.is_object()) throw Error("config: expected a JSON object");
  static const std::set<std::string> known{"s",           "mu",          "n_min",          "n_max",
                                           "grid_n",      "grid_n2",     "linear_n2",      "box_l",
                                           "dt",          "t_final",     "sample_stride",  "checkpoints",
                                           "c3_checkpoints", "scaling_times", "energy_steps", "prop2_monotone_times",
                                           "prop2_window", "n0",         "kappa_fraction", "out_dir",
                                           "format"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw Error("config: unknown key '" + k + "'");
  try {
    auto opt = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    opt("s", c.s);
    opt("mu", c.mu);
    opt("n_min", c.n_min);
    opt("n_max", c.n_max);
    if (j.contains("grid_n")) {
      if (j.at("grid_n").is_null()) c.grid_n.reset();
      else c.grid_n = j.at("grid_n").get<std::size_t>();
    }
    opt("grid_n2", c.grid_n2);
    opt("linear_n2", c.linear_n2);
    opt("box_l", c.box_l);
    opt("dt", c.dt);
    opt("t_final", c.t_final);
    opt("sample_stride", c.sample_stride);
    opt("checkpoints", c.checkpoints);
    opt("c3_checkpoints", c.c3_checkpoints);
    opt("scaling_times", c.scaling_times);
    opt("energy_steps", c.energy_steps);
    opt("prop2_monotone_times", c.prop2_monotone_times);
    if (j.contains("prop2_window")) {
      const auto w = j.at("prop2_window").get<std::vector<double>>();
      if (w.size() != 2) throw Error("config: prop2_window needs two entries");
      c.prop2_window_lo = w[0];
      c.prop2_window_hi = w[1];
    }
    opt("n0", c.n0);
    opt("kappa_fraction", c.kappa_fraction);
    opt("out_dir", c.out_dir);
    opt("format", c.format);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {}) {
  std::ifstream is(path);
  if (!is) throw IoError(path.string(), "cannot open for reading");
  try {
    return config_from_json(nlohmann::json::parse(is, nullptr, true, true), std::move(base));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path.string(), e.what());
  }
}

/// FNV-1a over the canonical JSON text, as 16 hex digits.
inline std::string config_hash(const nlohmann::json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

/// Solver configuration of one nonlinear cell (n, family) of an experiment.
inline SolverConfig cell_solver_config(const ExperimentConfig& cfg, int n) {
  SolverConfig sc(cfg.nonlinear_grid(n));
  sc.mu = cfg.mu;
  sc.dt = cfg.dt;
  sc.t_final = cfg.t_final;
  sc.sample_stride = cfg.sample_stride;
  sc.checkpoints = cfg.solver_checkpoints();
  sc.norm_index = cfg.s;
  return sc;
}

inline nlohmann::json cell_key(const ExperimentConfig& cfg, int n, Family family) {
  const SolverConfig sc = cell_solver_config(cfg, n);
  return {{"n", n},
          {"s", cfg.s},
          {"family", static_cast<int>(family)},
          {"mu", sc.mu},
          {"grid", {sc.grid.n1(), sc.grid.n2(), sc.grid.box_length()}},
          {"dt", sc.dt},
          {"t_final", sc.t_final},
          {"sample_stride", sc.sample_stride},
          {"checkpoints", sc.checkpoints},
          {"c_cfl", sc.c_cfl},
          {"delta_pos", sc.delta_pos}};
}

/// Nonlinear trajectory of one cell, computed from scratch.
inline Trajectory solve_cell(const ExperimentConfig& cfg, int n, Family family) {
  const SolverConfig sc = cell_solver_config(cfg, n);
  return integrate(initial_pair(DataFamilyParams(n, cfg.s), sc.grid, family), sc);
}

/// Nonlinear trajectories keyed by the hash of their cell configuration.
class TrajectoryCache {
 public:
  const Trajectory& get(const ExperimentConfig& cfg, int n, Family family) {
    const auto key = cell_key(cfg, n, family);
    const auto h = config_hash(key);
    auto it = store_.find(h);
    if (it != store_.end()) {
      if (it->second.first != key) throw Error("trajectory cache: hash collision on " + h);
      ++hits_;
      return it->second.second;
    }
    ++misses_;
    return store_.emplace(h, std::make_pair(key, solve_cell(cfg, n, family))).first->second.second;
  }

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }
  std::size_t size() const { return store_.size(); }
  void clear() { store_.clear(); }

 private:
  std::map<std::string, std::pair<nlohmann::json, Trajectory>> store_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

namespace detail {

/// The n values a rate is fitted over: the smallest n is pre-asymptotic and dropped when three or more remain.
inline std::vector<int> fit_ns(std::vector<int> ns) {
  std::sort(ns.begin(), ns.end());
  if (ns.size() >= 3) ns.erase(ns.begin());
  return ns;
}

/// rate = sign * slope of log2(values) against xs.
inline RateFit rate_fit(const std::string& quantity, const std::string& variable, double at,
                        const std::vector<double>& xs, const std::vector<double>& values, double sign, double expected,
                        double tolerance, const std::string& comparison) {
  RateFit f;
  f.quantity = quantity;
  f.variable = variable;
  f.at = at;
  f.xs = xs;
  f.expected = expected;
  f.tolerance = tolerance;
  f.comparison = comparison;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  bool finite = xs.size() >= 2;
  std::vector<double> ys;
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) finite = false;
    ys.push_back(std::log2(v));
  }
  if (!finite) {
    f.rate = f.intercept = f.residual = nan;
    f.pass = false;
    return f;
  }
  const LineFit lf = fit_line(xs, ys);
  f.rate = sign * lf.slope;
  f.intercept = lf.intercept;
  f.residual = lf.residual;
  const bool ok = comparison == "within" ? std::abs(f.rate - expected) <= tolerance : f.rate >= expected - tolerance;
  f.pass = ok && f.residual < kFitResidualBound;
  return f;
}

inline std::vector<double> as_doubles(const std::vector<int>& ns) { return {ns.begin(), ns.end()}; }

/// Linear flow evaluated mode by mode on the nonzero coefficients of the initial data only.
class SparseLinearFlow {
 public:
  SparseLinearFlow(const State& st0, double mu, std::vector<double> sigmas) : mu_(mu), sigmas_(std::move(sigmas)) {
    const Grid& g = st0.grid();
    h2_ = g.spacing() * g.spacing();
    for (std::size_t i1 = 0; i1 < g.n1(); ++i1)
      for (std::size_t i2 = 0; i2 < g.n2(); ++i2) {
        const std::size_t k = g.index(i1, i2);
        const cplx r = st0.rho[k], a = st0.u.c1()[k], b = st0.u.c2()[k];
        if (r == 0.0 && a == 0.0 && b == 0.0) continue;
        Mode m;
        m.xi1 = g.xi1(i1);
        m.xi2 = g.xi2(i2);
        m.r = std::hypot(m.xi1, m.xi2);
        m.eig = eigen(m.r, mu);
        m.rho = r;
        m.u1 = a;
        m.u2 = b;
        for (double s : sigmas_) m.w.push_back(std::pow(1.0 + m.r * m.r, s));
        modes_.push_back(std::move(m));
      }
  }

  std::size_t modes() const { return modes_.size(); }

  /// ||(rho, u)(t)||^2_{H^sigma} per sigma.
  std::vector<double> energy(double t) const { return eval(t, false); }

  /// ||grad u(t)||^2_{H^sigma} + ||div u(t)||^2_{H^sigma} per sigma.
  std::vector<double> dissipation(double t) const { return eval(t, true); }

  /// int_0^T dissipation dt on the geometric partition [T 2^{-k-1}, T 2^{-k}], k < levels, plus [0, T 2^{-levels}],
  /// eight Gauss-Legendre points per piece; resolves the fast e^{lambda_- t} transients.
  std::vector<double> dissipation_integral(double T, int levels = 34) const {
    using Q = boost::math::quadrature::gauss<double, 8>;
    const auto& x = Q::abscissa();
    const auto& w = Q::weights();
    std::vector<double> total(sigmas_.size(), 0.0);
    if (T <= 0.0) return total;
    auto piece = [&](double a, double b) {
      const double c = 0.5 * (a + b), h = 0.5 * (b - a);
      for (std::size_t i = 0; i < x.size(); ++i) {
        const auto lo = dissipation(c - h * x[i]);
        const auto hi = dissipation(c + h * x[i]);
        for (std::size_t j = 0; j < total.size(); ++j) total[j] += h * w[i] * (lo[j] + hi[j]);
      }
    };
    piece(0.0, std::ldexp(T, -levels));
    for (int k = levels - 1; k >= 0; --k) piece(std::ldexp(T, -(k + 1)), std::ldexp(T, -k));
    return total;
  }

 private:
  struct Mode {
    double xi1 = 0.0, xi2 = 0.0, r = 0.0;
    EigenMode eig;
    cplx rho, u1, u2;
    std::vector<double> w;
  };

  std::vector<double> eval(double t, bool diss) const {
    std::vector<double> out(sigmas_.size(), 0.0);
    for (const auto& m : modes_) {
      const auto k = kernels(m.eig, t);
      const double e1 = m.r == 0.0 ? 0.0 : m.xi1 / m.r, e2 = m.r == 0.0 ? 0.0 : m.xi2 / m.r;
      const cplx along = e1 * m.u1 + e2 * m.u2;
      const cplx iK(0.0, m.r * k.phi);
      const cplx rho = k.p_rr * m.rho - iK * along;
      const cplx comp = k.p_dd * along - iK * m.rho;
      const cplx u1 = e1 * comp + k.heat * (m.u1 - e1 * along);
      const cplx u2 = e2 * comp + k.heat * (m.u2 - e2 * along);
      double q;
      if (diss) {
        const cplx d = m.xi1 * u1 + m.xi2 * u2;
        q = m.r * m.r * (std::norm(u1) + std::norm(u2)) + std::norm(d);
      } else {
        q = std::norm(rho) + std::norm(u1) + std::norm(u2);
      }
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += m.w[j] * q;
    }
    for (auto& v : out) v *= h2_;
    return out;
  }

  double mu_;
  double h2_ = 1.0;
  std::vector<double> sigmas_;
  std::vector<Mode> modes_;
};

inline std::string family_tag(Family f) { return f == Family::first ? "f1" : "f2"; }

inline void record_failure(ExperimentReport& r, const std::string& what, const std::exception& e) {
  r.verdicts.push_back({what, false, std::numeric_limits<double>::quiet_NaN(),
                        std::numeric_limits<double>::quiet_NaN(), e.what()});
}

inline double value_at(const ExperimentReport& r, const std::string& q, int n, double t) {
  for (const auto& m : r.measurements)
    if (m.quantity == q && m.n == n && detail::same(m.t, t)) return m.value;
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

/// ||(g_n)_1 d_1 f_n||_{H^s}.
inline double transport_lead_norm(const DataFamilyParams& p, const Grid& g) {
  const SpectralField f = make_fn(p, g);
  const VectorField v = make_gn(p, g);
  return sobolev_norm(pointwise_product(v.c1(), partial(f, 0)), p.s);
}

/// E(t) = u^ap . grad rho^ap - (g_n)_1 d_1 f_n for the second family.
inline SpectralField transport_remainder(const DataFamilyParams& p, const Grid& g, double mu, double t) {
  const SpectralField lead = pointwise_product(make_gn(p, g).c1(), partial(make_fn(p, g), 0));
  return -1.0 * v_ap(p, g, mu, t) - lead;
}

/// Riemann-Lebesgue pair on the circle of length L: ||phi' phi cos(2^n x)||^2 and (1/2)||phi' phi||^2.
struct OscillatoryPair {
  double modulated = 0.0;
  double half_limit = 0.0;
  double ratio() const { return modulated / half_limit; }
};

inline OscillatoryPair riemann_lebesgue_pair(int n, double box_l) {
  const BumpProfile bump;
  const double h = 2.0 * std::numbers::pi / box_l;
  const double carrier = std::ldexp(1.0, n);
  const std::size_t m = 2 * Grid::points_for_band(carrier + 1.0, box_l);
  // Periodised phi and phi' from their few nonzero Fourier coefficients.
  std::vector<double> xi, w;
  for (int k = 1; k * h < BumpProfile::support_radius; ++k) {
    xi.push_back(k * h);
    w.push_back(bump.hat(k * h));
  }
  const double dx = box_l / static_cast<double>(m);
  OscillatoryPair out;
  for (std::size_t j = 0; j < m; ++j) {
    const double x = dx * static_cast<double>(j);
    double phi = bump.hat(0.0), dphi = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k) {
      phi += 2.0 * w[k] * std::cos(xi[k] * x);
      dphi -= 2.0 * xi[k] * w[k] * std::sin(xi[k] * x);
    }
    const double q = (phi / box_l) * (dphi / box_l);
    const double c = std::cos(carrier * x);
    out.modulated += q * q * c * c * dx;
    out.half_limit += 0.5 * q * q * dx;
  }
  return out;
}

/// Norm scaling and the exact linear energy balance, evaluated mode by mode.
inline ExperimentReport run_norm_scaling(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport r;
  r.experiment = "norms";
  r.config = to_json(cfg);
  const std::vector<double> sigmas{cfg.s - 1.0, cfg.s, cfg.s + 1.0};
  double worst_balance = 0.0;
  for (Family fam : {Family::first, Family::second}) {
    const auto tag = detail::family_tag(fam);
    for (int n : cfg.ns()) {
      const DataFamilyParams p(n, cfg.s);
      const detail::SparseLinearFlow flow(initial_pair(p, cfg.linear_grid(n), fam), cfg.mu, sigmas);
      const auto e0 = flow.energy(0.0);
      for (int k = 1; k <= cfg.energy_steps; ++k) {
        const double t = static_cast<double>(k) / cfg.energy_steps;
        const auto e = flow.energy(t);
        const auto d = flow.dissipation_integral(t);
        for (std::size_t j = 0; j < sigmas.size(); ++j) {
          const double bal = std::abs(e[j] + 2.0 * cfg.mu * d[j] - e0[j]) / e0[j];
          worst_balance = std::max(worst_balance, bal);
          r.add("balance_" + tag, n, t, sigmas[j], bal);
        }
      }
      for (double t : cfg.scaling_times) {
        const auto e = flow.energy(t);
        const auto d = flow.dissipation_integral(t);
        for (std::size_t j = 0; j < sigmas.size(); ++j) r.add("lhs_" + tag, n, t, sigmas[j], e[j] + cfg.mu * d[j]);
      }
    }
    const auto ns = detail::fit_ns(cfg.ns());
    if (ns.size() < 2) continue;
    static const char* labels[] = {"s-1", "s", "s+1"};
    for (double t : cfg.scaling_times)
      for (std::size_t j = 0; j < sigmas.size(); ++j) {
        const double sg = sigmas[j];
        std::vector<double> vals;
        for (int n : ns) {
          for (const auto& m : r.measurements)
            if (m.quantity == "lhs_" + tag && m.n == n && m.t == t && m.sigma == sg) vals.push_back(std::sqrt(m.value));
        }
        const double expected = fam == Family::first ? sg - cfg.s : std::max(sg - cfg.s, -1.0);
        auto f = detail::rate_fit("lhs_" + tag + "_sigma=" + labels[j], "n", t,
                                  detail::as_doubles(ns), vals, 1.0, expected, 0.05, "within");
        r.fits.push_back(std::move(f));
      }
  }
  r.verdicts.push_back({"energy_balance", worst_balance <= 1e-6, worst_balance, 1e-6,
                        "max relative |E(t) + 2 mu int D - E(0)| / E(0)"});
  return r;
}

/// First family: distance between the nonlinear and linear evolutions of the same data.
inline ExperimentReport run_prop1(const ExperimentConfig& cfg, TrajectoryCache* cache = nullptr) {
  cfg.validate();
  TrajectoryCache local;
  TrajectoryCache& tc = cache ? *cache : local;
  ExperimentReport r;
  r.experiment = "prop1";
  r.config = to_json(cfg);
  std::vector<int> done;
  for (int n : cfg.ns()) {
    try {
      const DataFamilyParams p(n, cfg.s);
      const Grid g = cfg.nonlinear_grid(n);
      const State st0 = initial_pair(p, g, Family::first);
      const Trajectory& tr = tc.get(cfg, n, Family::first);
      for (const auto& [t, st] : tr.snapshots) r.add("prop1_error", n, t, cfg.s, state_norm(st - evolve_linear(st0, cfg.mu, t), cfg.s));
      done.push_back(n);
    } catch (const Error& e) {
      detail::record_failure(r, "prop1 solver n=" + std::to_string(n), e);
    }
  }
  const auto ns = detail::fit_ns(done);
  if (ns.size() >= 2) {
    std::vector<double> vals;
    for (int n : ns) vals.push_back(detail::value_at(r, "prop1_error", n, cfg.t_final));
    const double expected = 0.5 * std::min(cfg.eps_s(), 1.0);
    r.fits.push_back(detail::rate_fit("prop1_error_decay", "n", cfg.t_final, detail::as_doubles(ns), vals, -1.0,
                                      expected, 0.05, "at_least"));
  }
  return r;
}

/// Second family: residual after the t V^ap correction, its behaviour in t at the largest n.
inline ExperimentReport run_prop2(const ExperimentConfig& cfg, TrajectoryCache* cache = nullptr) {
  cfg.validate();
  TrajectoryCache local;
  TrajectoryCache& tc = cache ? *cache : local;
  ExperimentReport r;
  r.experiment = "prop2";
  r.config = to_json(cfg);
  std::vector<int> done;
  for (int n : cfg.ns()) {
    try {
      const DataFamilyParams p(n, cfg.s);
      const Grid g = cfg.nonlinear_grid(n);
      const State st0 = initial_pair(p, g, Family::second);
      const Trajectory& tr = tc.get(cfg, n, Family::second);
      for (const auto& [t, st] : tr.snapshots) {
        const State ap = evolve_linear(st0, cfg.mu, t);
        const SpectralField v = transport_term(ap);
        const double res = sobolev_norm(st.u - ap.u, cfg.s) + sobolev_norm(st.rho - ap.rho - t * v, cfg.s);
        r.add("prop2_residual", n, t, cfg.s, res);
        r.add("prop2_uncorrected", n, t, cfg.s, state_norm(st - ap, cfg.s));
        r.add("v_ap_norm", n, t, cfg.s, sobolev_norm(v, cfg.s));
      }
      done.push_back(n);
    } catch (const Error& e) {
      detail::record_failure(r, "prop2 solver n=" + std::to_string(n), e);
    }
  }
  if (done.empty()) return r;
  const int nstar = done.back();
  // residual / t -> 0 as t -> 0: along increasing monotone times it must strictly increase.
  std::vector<double> ratios;
  for (double t : cfg.prop2_monotone_times) ratios.push_back(detail::value_at(r, "prop2_residual", nstar, t) / t);
  bool monotone = ratios.size() >= 2;
  double worst = 0.0;
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    monotone = monotone && ratios[i - 1] < ratios[i];
    worst = std::max(worst, ratios[i - 1] / ratios[i]);
  }
  r.verdicts.push_back({"prop2_residual_over_t_vanishing", monotone, worst, 1.0,
                        "largest ratio of residual/t at an earlier time to the next, n=" + std::to_string(nstar)});
  if (!cfg.prop2_monotone_times.empty()) {
    const double t0 = cfg.prop2_monotone_times.front();
    const double dom = detail::value_at(r, "v_ap_norm", nstar, t0) / (detail::value_at(r, "prop2_residual", nstar, t0) / t0);
    r.verdicts.push_back({"prop2_correction_dominates", dom > 1.0, dom, 1.0,
                          "||V^ap|| / (residual/t) at the smallest monotone time"});
  }
  std::vector<double> xs, vals;
  for (double t : cfg.solver_checkpoints())
    if (t >= cfg.prop2_window_lo && t <= cfg.prop2_window_hi) {
      xs.push_back(std::log2(t));
      vals.push_back(detail::value_at(r, "prop2_residual", nstar, t));
    }
  if (xs.size() >= 2) {
    r.fits.push_back(detail::rate_fit("prop2_residual_t_slope", "log2_t", static_cast<double>(nstar), xs, vals, 1.0,
                                      1.5, 0.1, "at_least"));
  }
  return r;
}

/// Transport lead term, its Riemann-Lebesgue limit, and the remainder E.
inline ExperimentReport run_liminf(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport r;
  r.experiment = "liminf";
  r.config = to_json(cfg);
  for (int n : cfg.ns()) {
    const DataFamilyParams p(n, cfg.s);
    const Grid g = cfg.nonlinear_grid(n);
    r.add("transport_lead", n, 0.0, cfg.s, transport_lead_norm(p, g));
    const auto rl = riemann_lebesgue_pair(n, cfg.box_l);
    r.add("rl_modulated", n, 0.0, 0.0, rl.modulated);
    r.add("rl_half_limit", n, 0.0, 0.0, rl.half_limit);
    r.add("rl_ratio", n, 0.0, 0.0, rl.ratio());
    std::vector<double> ts{0.0};
    for (double t : cfg.checkpoints)
      if (t > 0.0) ts.push_back(t);
    for (double t : ts) r.add("remainder", n, t, cfg.s, sobolev_norm(transport_remainder(p, g, cfg.mu, t), cfg.s));
  }
  double c_e = 0.0;
  for (const auto& m : r.measurements)
    if (m.quantity == "remainder") c_e = std::max(c_e, m.value / (m.t + std::ldexp(1.0, -m.n)));
  r.add("remainder_constant", -1, std::numeric_limits<double>::quiet_NaN(), cfg.s, c_e);

  constexpr int kAsymptoticFrom = 6;
  double rl_worst = 0.0, lead_worst = 0.0;
  bool rl_any = false, lead_any = false;
  for (int n : cfg.ns()) {
    if (n < kAsymptoticFrom) continue;
    rl_any = true;
    rl_worst = std::max(rl_worst, std::abs(detail::value_at(r, "rl_ratio", n, 0.0) - 1.0));
    if (n - 1 >= cfg.n_min) {
      lead_any = true;
      const double a = detail::value_at(r, "transport_lead", n, 0.0);
      const double b = detail::value_at(r, "transport_lead", n - 1, 0.0);
      lead_worst = std::max(lead_worst, std::abs(a / b - 1.0));
    }
  }
  if (rl_any) r.verdicts.push_back({"riemann_lebesgue_limit", rl_worst <= 0.01, rl_worst, 0.01, "max |ratio - 1|, n >= 6"});
  if (lead_any)
    r.verdicts.push_back({"transport_lead_stabilises", lead_worst < 0.02, lead_worst, 0.02,
                          "max successive relative change, n >= 6"});
  const auto ns = detail::fit_ns(cfg.ns());
  if (ns.size() >= 2) {
    std::vector<double> vals;
    for (int n : ns) vals.push_back(detail::value_at(r, "remainder", n, 0.0));
    r.fits.push_back(detail::rate_fit("remainder_t0", "n", 0.0, detail::as_doubles(ns), vals, 1.0, -1.0, 0.1, "within"));
  }
  return r;
}

/// Conditions C.1-C.3: bounded data, converging data, separated solutions.
inline ExperimentReport run_nonuniform(const ExperimentConfig& cfg, TrajectoryCache* cache = nullptr) {
  cfg.validate();
  TrajectoryCache local;
  TrajectoryCache& tc = cache ? *cache : local;
  ExperimentReport r;
  r.experiment = "nonuniform";
  r.config = to_json(cfg);
  std::vector<int> done;
  for (int n : cfg.ns()) {
    const DataFamilyParams p(n, cfg.s);
    const Grid g = cfg.nonlinear_grid(n);
    const State a0 = initial_pair(p, g, Family::first);
    const State b0 = initial_pair(p, g, Family::second);
    r.add("data_norm_f1", n, 0.0, cfg.s, state_norm(a0, cfg.s));
    r.add("data_norm_f2", n, 0.0, cfg.s, state_norm(b0, cfg.s));
    r.add("distance", n, 0.0, cfg.s, state_norm(b0 - a0, cfg.s));
    r.add("transport_lead", n, 0.0, cfg.s, transport_lead_norm(p, g));
    try {
      const Trajectory& ta = tc.get(cfg, n, Family::first);
      const Trajectory& tb = tc.get(cfg, n, Family::second);
      for (const auto& [t, sb] : tb.snapshots)
        if (t > 0.0) r.add("distance", n, t, cfg.s, state_norm(sb - ta.at(t), cfg.s));
      done.push_back(n);
    } catch (const Error& e) {
      detail::record_failure(r, "nonuniform solver n=" + std::to_string(n), e);
    }
  }
  const auto all_ns = cfg.ns();
  const auto ns = detail::fit_ns(all_ns);
  if (ns.size() >= 2) {
    for (const char* q : {"data_norm_f1", "data_norm_f2"}) {
      std::vector<double> vals;
      for (int n : ns) vals.push_back(detail::value_at(r, q, n, 0.0));
      r.fits.push_back(detail::rate_fit(std::string("c1_") + q, "n", 0.0, detail::as_doubles(ns), vals, 1.0, 0.0, 0.05,
                                        "within"));
    }
    std::vector<double> vals;
    for (int n : ns) vals.push_back(detail::value_at(r, "distance", n, 0.0));
    r.fits.push_back(
        detail::rate_fit("c2_initial_distance", "n", 0.0, detail::as_doubles(ns), vals, 1.0, -1.0, 0.05, "within"));
  }
  if (all_ns.size() >= 2) {
    double worst = 0.0;
    bool decreasing = true;
    for (std::size_t i = 1; i < all_ns.size(); ++i) {
      const double q = detail::value_at(r, "distance", all_ns[i], 0.0) / detail::value_at(r, "distance", all_ns[i - 1], 0.0);
      worst = std::max(worst, std::abs(q / 0.5 - 1.0));
      decreasing = decreasing && q < 1.0;
    }
    r.verdicts.push_back({"c2_halving", worst <= 0.01, worst, 0.01, "max |D0(n+1)/D0(n) / (1/2) - 1|"});
    r.verdicts.push_back({"c2_decreasing", decreasing, worst, 0.01, "D0 strictly decreasing in n"});
  }
  // kappa from the measured liminf of the transport lead term over n >= n0.
  std::vector<int> tail;
  for (int n : all_ns)
    if (n >= cfg.n0) tail.push_back(n);
  if (tail.empty()) tail = all_ns;
  double liminf = std::numeric_limits<double>::infinity();
  for (int n : tail) liminf = std::min(liminf, detail::value_at(r, "transport_lead", n, 0.0));
  const double kappa = cfg.kappa_fraction * liminf;
  r.add("transport_lead_liminf", -1, std::numeric_limits<double>::quiet_NaN(), cfg.s, liminf);
  r.add("kappa", -1, std::numeric_limits<double>::quiet_NaN(), cfg.s, kappa);
  std::vector<int> tail_done;
  for (int n : done)
    if (std::find(tail.begin(), tail.end(), n) != tail.end()) tail_done.push_back(n);
  if (!tail_done.empty() && !cfg.c3_checkpoints.empty()) {
    double largest = 0.0;
    auto c3 = cfg.c3_checkpoints;
    std::sort(c3.begin(), c3.end());
    double headline = std::numeric_limits<double>::quiet_NaN();
    for (double t : c3) {
      double m = std::numeric_limits<double>::infinity();
      for (int n : tail_done) m = std::min(m, detail::value_at(r, "distance", n, t) / t);
      r.add("c3_min_distance_over_t", -1, t, cfg.s, m);
      if (m >= kappa) largest = t;
      headline = m;
    }
    r.add("c3_largest_t", -1, std::numeric_limits<double>::quiet_NaN(), cfg.s, largest);
    r.verdicts.push_back({"c3_lower_bound", headline >= kappa, headline, kappa,
                          "min over n >= n0 of D_t(n)/t at t = " + nlohmann::json(c3.back()).dump()});
  }
  return r;
}

/// Every experiment in order, sharing one trajectory cache, merged into a single report.
inline ExperimentReport run_all(const ExperimentConfig& cfg, TrajectoryCache* cache = nullptr) {
  TrajectoryCache local;
  TrajectoryCache& tc = cache ? *cache : local;
  ExperimentReport all;
  all.experiment = "all";
  all.config = to_json(cfg);
  all.merge(run_norm_scaling(cfg));
  all.merge(run_prop1(cfg, &tc));
  all.merge(run_prop2(cfg, &tc));
  all.merge(run_nonuniform(cfg, &tc));
  all.merge(run_liminf(cfg));
  return all;
}

}  // namespace swnu
