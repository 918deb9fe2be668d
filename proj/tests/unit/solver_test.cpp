#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "swnu/initial_data.hpp"
#include "swnu/solver.hpp"
#include "test_support.hpp"

using namespace swnu;
using swnu::testing::max_abs;
using swnu::testing::max_abs_diff;
using swnu::testing::random_band_limited;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

State random_state(const Grid& g, std::mt19937_64& rng, double amp) {
  auto f = [&] { return random_band_limited(g, rng, true, 0.6).scaled(amp); };
  auto r = f();
  auto u1 = f();
  auto u2 = f();
  return State{r, VectorField(u1, u2)};
}

// Coefficient of the product of two fields by direct convolution (continuum units).
cplx conv(const SpectralField& a, const SpectralField& b, long k1, long k2, long kmax) {
  cplx sum = 0.0;
  for (long a1 = -kmax; a1 <= kmax; ++a1)
    for (long a2 = -kmax; a2 <= kmax; ++a2) {
      const long b1 = k1 - a1, b2 = k2 - a2;
      if (std::labs(b1) > kmax || std::labs(b2) > kmax) continue;
      sum += a.at(a1, a2) * b.at(b1, b2);
    }
  const double L = a.grid().box_length();
  return sum / (L * L);
}

}  // namespace

TEST(Rhs, RestStateAndResting) {
  Grid g(16, kTwoPi);
  State zero{SpectralField::zeros(g), VectorField::zeros(g)};
  auto n = rhs_nonlinear(zero, 1.0);
  EXPECT_EQ(max_abs(n.rho) + max_abs(n.u.c1()) + max_abs(n.u.c2()), 0.0);
  std::mt19937_64 rng(31);
  State st{random_band_limited(g, rng).scaled(0.01), VectorField::zeros(g)};
  n = rhs_nonlinear(st, 1.0);
  EXPECT_LT(max_abs(n.rho) + max_abs(n.u.c1()) + max_abs(n.u.c2()), 1e-15);
}

TEST(Rhs, BilinearTermsMatchConvolution) {
  // rho = 0 removes the logarithmic term; what is left is -(u.grad)u and -div(rho u).
  std::mt19937_64 rng(32);
  const double L = 5.0;
  Grid g(8, L);
  for (int trial = 0; trial < 3; ++trial) {
    const auto u1 = random_band_limited(g, rng);
    const auto u2 = random_band_limited(g, rng);
    const auto n = rhs_nonlinear(State{SpectralField::zeros(g), VectorField(u1, u2)}, 1.0);
    const auto d1u1 = partial(u1, 0), d2u1 = partial(u1, 1), d1u2 = partial(u2, 0), d2u2 = partial(u2, 1);
    for (long k1 = -2; k1 <= 2; ++k1)
      for (long k2 = -2; k2 <= 2; ++k2) {
        const cplx e1 = -(conv(u1, d1u1, k1, k2, 3) + conv(u2, d2u1, k1, k2, 3));
        const cplx e2 = -(conv(u1, d1u2, k1, k2, 3) + conv(u2, d2u2, k1, k2, 3));
        EXPECT_LT(std::abs(n.u.c1().at(k1, k2) - e1), 1e-12 * max_abs(n.u.c1()));
        EXPECT_LT(std::abs(n.u.c2().at(k1, k2) - e2), 1e-12 * max_abs(n.u.c2()));
      }
    // Density flux with a density field present: compare its rho part only.
    const auto r = random_band_limited(g, rng).scaled(0.1);
    const auto m = rhs_nonlinear(State{r, VectorField(u1, u2)}, 1.0);
    const double h = g.spacing();
    for (long k1 = -2; k1 <= 2; ++k1)
      for (long k2 = -2; k2 <= 2; ++k2) {
        const cplx e = -cplx(0.0, 1.0) * (h * k1 * conv(r, u1, k1, k2, 3) + h * k2 * conv(r, u2, k1, k2, 3));
        EXPECT_LT(std::abs(m.rho.at(k1, k2) - e), 1e-12 * max_abs(m.rho));
      }
  }
}

TEST(Rhs, MatchesOperatorComposition) {
  std::mt19937_64 rng(33);
  Grid g(32, 16, 7.0);
  const auto st = random_state(g, rng, 0.05);
  const auto n = rhs_nonlinear(st, 1.0);
  const auto& u = st.u;
  const auto ell = log_one_plus(st.rho);
  const auto gl = grad(ell);
  const auto p = [](const SpectralField& a, const SpectralField& b) { return pointwise_product(a, b); };
  const auto d11 = partial(u.c1(), 0), d21 = partial(u.c1(), 1), d12 = partial(u.c2(), 0), d22 = partial(u.c2(), 1);
  const auto shear = d21 + d12;
  const auto e1 = -(p(u.c1(), d11) + p(u.c2(), d21)) + p(gl.c1(), 2.0 * d11) + p(gl.c2(), shear);
  const auto e2 = -(p(u.c1(), d12) + p(u.c2(), d22)) + p(gl.c1(), shear) + p(gl.c2(), 2.0 * d22);
  const auto er = -div(VectorField(p(st.rho, u.c1()), p(st.rho, u.c2())));
  EXPECT_LT(max_abs_diff(n.u.c1(), e1), 1e-12 * max_abs(e1));
  EXPECT_LT(max_abs_diff(n.u.c2(), e2), 1e-12 * max_abs(e2));
  EXPECT_LT(max_abs_diff(n.rho, er), 1e-12 * max_abs(er));
  // Conservative and advective forms of the density flux agree for band-limited products.
  const auto adv = -(p(u.c1(), partial(st.rho, 0)) + p(u.c2(), partial(st.rho, 1))) - p(st.rho, div(u));
  EXPECT_LT(max_abs_diff(adv.dealiased(), er), 1e-10 * max_abs(er));
}

TEST(Rhs, NonPositiveDensity) {
  Grid g(16, kTwoPi);
  auto r = SpectralField::from_function(g, [](double x, double) { return -1.2 * std::cos(x); });
  EXPECT_THROW(rhs_nonlinear(State{r, VectorField::zeros(g)}, 1.0), NonPositiveDensity);
}

TEST(Solver, ZeroStaysZero) {
  Grid g(16, kTwoPi);
  SolverConfig cfg{g};
  cfg.t_final = 0.05;
  cfg.dt = 0.01;
  auto traj = integrate(State{SpectralField::zeros(g), VectorField::zeros(g)}, cfg);
  const auto& st = traj.at(0.05);
  EXPECT_EQ(max_abs(st.rho) + max_abs(st.u.c1()) + max_abs(st.u.c2()), 0.0);
}

TEST(Solver, LinearOnlyReproducesPropagator) {
  std::mt19937_64 rng(34);
  Grid g(32, 16, 6.0);
  const auto st = random_state(g, rng, 1.0);
  SolverConfig cfg{g};
  cfg.nonlinear = false;
  cfg.dt = 0.01;
  cfg.t_final = 0.3;
  const auto out = integrate(st, cfg).at(0.3);
  const auto exact = evolve_linear(st, 1.0, 0.3);
  EXPECT_LT(max_abs_diff(out.rho, exact.rho), 1e-13 * max_abs(exact.rho));
  EXPECT_LT(max_abs_diff(out.u.c2(), exact.u.c2()), 1e-13 * max_abs(exact.u.c2()));
  const auto probe = convergence_probe(st, cfg);
  EXPECT_TRUE(probe.machine_level);
  EXPECT_TRUE(probe.floor);
}

TEST(Solver, MassConservedAndRealityKept) {
  std::mt19937_64 rng(35);
  Grid g(32, 4.0);
  auto st = random_state(g, rng, 0.1);
  st.rho = st.rho + SpectralField::from_function(g, [](double, double) { return 0.05; });
  SolverConfig cfg{g};
  cfg.dt = 0.005;
  cfg.t_final = 0.2;
  auto traj = integrate(st, cfg);
  const double m0 = traj.samples.front().mass;
  for (const auto& s : traj.samples) EXPECT_LE(std::abs(s.mass - m0), 1e-10 * std::abs(m0));
  EXPECT_TRUE(traj.at(0.2).rho.is_real());
}

TEST(Solver, CheckpointsDoNotPerturbMainSequence) {
  std::mt19937_64 rng(36);
  Grid g(32, 16, 5.0);
  const auto st = random_state(g, rng, 0.1);
  SolverConfig a{g};
  a.dt = 0.01;
  a.t_final = 0.1;
  SolverConfig b = a;
  b.checkpoints = {0.033, 0.05, 0.0777};
  const auto ta = integrate(st, a);
  const auto tb = integrate(st, b);
  EXPECT_EQ(max_abs_diff(ta.at(0.1).rho, tb.at(0.1).rho), 0.0);
  EXPECT_EQ(max_abs_diff(ta.at(0.1).u.c1(), tb.at(0.1).u.c1()), 0.0);
  EXPECT_EQ(tb.snapshots.size(), 4u);
  // A checkpoint between grid points agrees with a run whose grid hits it, to the scheme's accuracy.
  SolverConfig c = a;
  c.dt = 0.0777 / 8;
  c.t_final = 0.0777;
  const auto tc = integrate(st, c);
  EXPECT_LT(max_abs_diff(tb.at(0.0777).rho, tc.at(0.0777).rho), 1e-7 * max_abs(tc.at(0.0777).rho));
}

TEST(Solver, Deterministic) {
  std::mt19937_64 rng(37);
  Grid g(32, 5.0);
  const auto st = random_state(g, rng, 0.1);
  SolverConfig cfg{g};
  cfg.dt = 0.01;
  cfg.t_final = 0.05;
  std::ostringstream a, b;
  write_jsonl(a, integrate(st, cfg));
  write_jsonl(b, integrate(st, cfg));
  const std::string text = a.str();
  EXPECT_EQ(text, b.str());
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
}

TEST(Solver, SampleStride) {
  Grid g(16, kTwoPi);
  SolverConfig cfg{g};
  cfg.dt = 0.01;
  cfg.t_final = 0.1;
  cfg.sample_stride = 3;
  auto traj = integrate(State{SpectralField::zeros(g), VectorField::zeros(g)}, cfg);
  ASSERT_EQ(traj.samples.size(), 5u);  // 0, 0.03, 0.06, 0.09, 0.1
  for (std::size_t i = 1; i < traj.samples.size(); ++i) EXPECT_GT(traj.samples[i].t, traj.samples[i - 1].t);
  EXPECT_NEAR(traj.samples.back().t, 0.1, 1e-15);
}

TEST(Solver, CflViolation) {
  Grid g(64, kTwoPi);
  auto psi = SpectralField::from_function(g, [](double x, double y) { return 10.0 * std::sin(x + y); });
  SolverConfig cfg{g};
  cfg.dt = 0.1;
  cfg.t_final = 0.1;
  EXPECT_THROW(integrate(State{SpectralField::zeros(g), perp_grad(psi)}, cfg), CflViolation);
}

TEST(Solver, ConfigValidation) {
  Grid g(16, kTwoPi);
  SolverConfig cfg{g};
  cfg.dt = -1.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.dt = 0.1;
  cfg.t_final = 1.0;
  cfg.checkpoints = {2.0};
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Solver, FourthOrderOnSmoothData) {
  std::mt19937_64 rng(38);
  Grid g(32, 16, 8.0);
  const auto st = random_state(g, rng, 0.2);
  SolverConfig cfg{g};
  cfg.dt = 0.02;
  cfg.t_final = 0.2;
  const auto probe = convergence_probe(st, cfg);
  EXPECT_NEAR(probe.order, 4.0, 0.3);
  EXPECT_FALSE(probe.floor);
}

TEST(Solver, ProbeFlagsUnresolvedReferenceFloor) {
  // Against a reference on a finer grid, an under-resolved run stalls at its spatial error.
  std::mt19937_64 rng(39);
  Grid fine(64, 32, 8.0);
  Grid coarse(16, 8, 8.0);
  auto st = random_state(fine, rng, 0.2);
  SolverConfig ref_cfg{fine};
  ref_cfg.dt = 0.0025;
  ref_cfg.t_final = 0.2;
  const auto ref = integrate(st, ref_cfg).at(0.2);
  SolverConfig cfg{coarse};
  cfg.dt = 0.02;
  cfg.t_final = 0.2;
  const auto probe = convergence_probe(st.resampled(coarse), cfg, ref);
  EXPECT_TRUE(probe.floor);
  EXPECT_LT(probe.order, 1.0);
}
