// Sweeps the Sobolev index over the linear-only experiments and prints one row per s.
#include <iomanip>
#include <iostream>

#include "swnu/experiments.hpp"

int main() {
  std::cout << "s      balance     lead_limit   remainder_rate  all_pass\n";
  for (double s : {2.25, 2.5, 3.0, 4.5}) {
    swnu::ExperimentConfig cfg;
    cfg.s = s;
    cfg.n_min = 3;
    cfg.n_max = 6;
    const auto norms = swnu::run_norm_scaling(cfg);
    const auto lim = swnu::run_liminf(cfg);
    double lead = 0.0;
    for (const auto& m : lim.measurements)
      if (m.quantity == "transport_lead" && m.n == cfg.n_max) lead = m.value;
    std::cout << std::fixed << std::setprecision(2) << std::setw(5) << s << "  " << std::scientific << std::setprecision(3) << norms.verdicts.front().value
              << "  " << lead << "  " << std::fixed << std::setprecision(4) << std::setw(14) << lim.fits.front().rate
              << "  " << (norms.all_pass() && lim.all_pass() ? "yes" : "no") << '\n';
  }
}
