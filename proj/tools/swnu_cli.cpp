#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "swnu/experiments.hpp"
#include "swnu/initial_data.hpp"
#include "swnu/linear.hpp"
#include "swnu/snapshot.hpp"
#include "swnu/solver.hpp"

namespace {

using namespace swnu;

struct SharedFlags {
  std::string config;
  std::optional<double> s, mu, box_l, dt, t_final;
  std::optional<int> n_min, n_max;
  std::optional<std::size_t> grid_n;
  std::optional<std::string> out_dir, format;
};

void add_shared(CLI::App* app, SharedFlags& f) {
  app->add_option("--config", f.config, "JSON config file (docs/config.md); flags override it")->check(CLI::ExistingFile);
  app->add_option("--s", f.s, "Sobolev index, > 2");
  app->add_option("--mu", f.mu, "viscosity");
  app->add_option("--n-min", f.n_min, "smallest frequency exponent");
  app->add_option("--n-max", f.n_max, "largest frequency exponent");
  app->add_option("--grid-n", f.grid_n, "x1 points of every grid (default: smallest alias-free power of two)");
  app->add_option("--box-l", f.box_l, "period L of the box");
  app->add_option("--dt", f.dt, "time step");
  app->add_option("--t-final", f.t_final, "final time, <= 1");
  app->add_option("--out-dir", f.out_dir, "report directory");
  app->add_option("--format", f.format, "report format")->check(CLI::IsMember({"json", "csv"}));
}

ExperimentConfig resolve(const SharedFlags& f) {
  ExperimentConfig c;
  if (!f.config.empty()) c = load_config(f.config);
  if (f.s) c.s = *f.s;
  if (f.mu) c.mu = *f.mu;
  if (f.n_min) c.n_min = *f.n_min;
  if (f.n_max) c.n_max = *f.n_max;
  if (f.grid_n) c.grid_n = *f.grid_n;
  if (f.box_l) c.box_l = *f.box_l;
  if (f.dt) c.dt = *f.dt;
  if (f.t_final) {
    c.t_final = *f.t_final;
    // Checkpoints past a shortened horizon are dropped rather than rejected.
    for (auto* ts : {&c.checkpoints, &c.c3_checkpoints, &c.prop2_monotone_times})
      std::erase_if(*ts, [&](double t) { return t > c.t_final; });
  }
  if (f.out_dir) c.out_dir = *f.out_dir;
  if (f.format) c.format = *f.format;
  c.validate();
  return c;
}

void print_summary(const ExperimentReport& r, const std::filesystem::path& path) {
  for (const auto& f : r.fits) {
    std::cout << (f.pass ? "PASS " : "FAIL ") << f.quantity << " rate=" << f.rate << " residual=" << f.residual
              << " expected " << (f.comparison == "within" ? "" : ">= ") << f.expected
              << (f.comparison == "within" ? " +- " : " - ") << f.tolerance << '\n';
  }
  for (const auto& v : r.verdicts)
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << " value=" << v.value << " threshold=" << v.threshold << '\n';
  std::cout << "report: " << path.string() << '\n';
}

int run_experiment(const SharedFlags& flags, const std::function<ExperimentReport(const ExperimentConfig&)>& run) {
  const ExperimentConfig cfg = resolve(flags);
  const ExperimentReport r = run(cfg);
  const auto path = emit_report(r, cfg.out_dir, cfg.format);
  print_summary(r, path);
  return r.all_pass() ? 0 : 1;
}

struct CellFlags {
  int n = 4;
  double s = 2.5;
  int family = 2;
  double box_l = 16.0 * std::numbers::pi;
  std::optional<std::size_t> grid_n;
};

void add_cell(CLI::App* app, CellFlags& f) {
  app->add_option("--n", f.n, "frequency exponent")->check(CLI::PositiveNumber);
  app->add_option("--s", f.s, "Sobolev index, > 2");
  app->add_option("--family", f.family, "1: (f_n, 0), 2: (f_n, g_n)")->check(CLI::IsMember({1, 2}));
  app->add_option("--box-l", f.box_l, "period L of the box");
  app->add_option("--grid-n", f.grid_n, "x1 points (default: alias-free for quadratic terms)");
}

ExperimentConfig cell_config(const CellFlags& f) {
  ExperimentConfig c;
  c.s = f.s;
  c.box_l = f.box_l;
  c.grid_n = f.grid_n;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral shallow-water solver and non-uniform dependence harness"};
  app.require_subcommand(1);

  SharedFlags shared;
  const std::vector<std::pair<std::string, std::function<ExperimentReport(const ExperimentConfig&)>>> experiments{
      {"norms", [](const ExperimentConfig& c) { return run_norm_scaling(c); }},
      {"prop1", [](const ExperimentConfig& c) { return run_prop1(c); }},
      {"prop2", [](const ExperimentConfig& c) { return run_prop2(c); }},
      {"nonuniform", [](const ExperimentConfig& c) { return run_nonuniform(c); }},
      {"liminf", [](const ExperimentConfig& c) { return run_liminf(c); }},
      {"all", [](const ExperimentConfig& c) { return run_all(c); }},
  };
  const std::map<std::string, std::string> blurbs{
      {"norms", "norm scaling of the linear flow and its energy balance"},
      {"prop1", "nonlinear vs linear error, first family"},
      {"prop2", "corrected nonlinear vs linear residual, second family"},
      {"nonuniform", "initial and later distances between the two families"},
      {"liminf", "transport lead term, Riemann-Lebesgue limit, remainder E"},
      {"all", "every experiment with a shared trajectory cache"},
  };
  int status = 0;
  for (const auto& [name, run] : experiments) {
    auto* sub = app.add_subcommand(name, blurbs.at(name));
    add_shared(sub, shared);
    sub->callback([&, run] { status = run_experiment(shared, run); });
  }

  CellFlags data_flags;
  std::string data_dump;
  auto* data = app.add_subcommand("data", "construct one initial pair and print its norms");
  add_cell(data, data_flags);
  data->add_option("--dump", data_dump, "directory for rho/u1/u2 snapshots");
  data->callback([&] {
    const ExperimentConfig c = cell_config(data_flags);
    const Grid g = c.nonlinear_grid(data_flags.n);
    const State st = initial_pair(DataFamilyParams(data_flags.n, data_flags.s), g, static_cast<Family>(data_flags.family));
    nlohmann::json j{{"grid", g.describe()},
                     {"rho_norm", sobolev_norm(st.rho, data_flags.s)},
                     {"u_norm", sobolev_norm(st.u, data_flags.s)},
                     {"min_density", 1.0 + physical_min(st.rho)}};
    std::cout << j.dump() << '\n';
    if (!data_dump.empty()) save_state(data_dump, "data", st);
  });

  CellFlags ev_flags;
  double ev_mu = 1.0, ev_dt = 1e-3, ev_t = 0.1;
  std::size_t ev_stride = 10, ev_dump_every = 0;
  std::string ev_dump, ev_out;
  bool ev_linear = false;
  auto* evolve = app.add_subcommand("evolve", "integrate one initial pair and write JSON-lines summaries");
  add_cell(evolve, ev_flags);
  evolve->add_option("--mu", ev_mu, "viscosity");
  evolve->add_option("--dt", ev_dt, "time step");
  evolve->add_option("--t-final", ev_t, "final time");
  evolve->add_option("--sample-stride", ev_stride, "steps between summaries");
  evolve->add_option("--dump-every", ev_dump_every, "steps between snapshots (0: final state only)");
  evolve->add_option("--dump", ev_dump, "snapshot directory");
  evolve->add_option("--out", ev_out, "JSON-lines file (default: stdout)");
  evolve->add_flag("--linear", ev_linear, "drop the nonlinear terms");
  evolve->callback([&] {
    const ExperimentConfig c = cell_config(ev_flags);
    SolverConfig sc(c.nonlinear_grid(ev_flags.n));
    sc.mu = ev_mu;
    sc.dt = ev_dt;
    sc.t_final = ev_t;
    sc.sample_stride = ev_stride;
    sc.nonlinear = !ev_linear;
    sc.norm_index = ev_flags.s;
    if (ev_dump_every > 0)
      for (std::size_t k = ev_dump_every; static_cast<double>(k) * ev_dt < ev_t; k += ev_dump_every)
        sc.checkpoints.push_back(static_cast<double>(k) * ev_dt);
    const State st0 = initial_pair(DataFamilyParams(ev_flags.n, ev_flags.s), sc.grid, static_cast<Family>(ev_flags.family));
    const Trajectory tr = integrate(st0, sc);
    if (ev_out.empty()) {
      write_jsonl(std::cout, tr);
    } else {
      std::ofstream os(ev_out);
      if (!os) throw IoError(ev_out, "cannot open for writing");
      write_jsonl(os, tr);
    }
    if (!ev_dump.empty()) {
      std::size_t i = 0;
      for (const auto& [t, st] : tr.snapshots) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "snap%04zu", i++);
        save_state(ev_dump, stem, st);
      }
    }
  });

  double k_mu = 1.0, k_t = 0.1, k_max = 4.0;
  std::size_t k_count = 65;
  auto* kern = app.add_subcommand("kernels", "CSV of eigenvalues and propagator kernels over |xi|");
  kern->add_option("--mu", k_mu, "viscosity");
  kern->add_option("--t", k_t, "time");
  kern->add_option("--xi-max", k_max, "largest |xi|");
  kern->add_option("--count", k_count, "number of |xi| samples from 0")->check(CLI::Range(2, 1000000));
  kern->callback([&] {
    std::vector<double> xs;
    for (std::size_t i = 0; i < k_count; ++i) xs.push_back(k_max * static_cast<double>(i) / static_cast<double>(k_count - 1));
    write_kernel_csv(std::cout, xs, k_mu, k_t);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const swnu::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return status;
}
