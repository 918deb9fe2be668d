#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ode_oracle.hpp"
#include "swnu/linear.hpp"
#include "test_support.hpp"

using namespace swnu;
using swnu::testing::max_abs;
using swnu::testing::max_abs_diff;
using swnu::testing::random_band_limited;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double oracle_error(double r, double mu, double t) {
  const auto k = kernels(eigen(r, mu), t);
  const auto o = swnu::testing::ode_propagator(r, mu, t);
  const double m[4] = {k.p_rr, -r * k.phi, r * k.phi, k.p_dd};
  double err = 0.0, scale = 0.0;
  for (int i = 0; i < 4; ++i) {
    err = std::max(err, std::abs(m[i] - o[i]));
    scale = std::max(scale, std::abs(o[i]));
  }
  return err / scale;
}

}  // namespace

TEST(Eigen, ConfluentAndDistinctValues) {
  auto e = eigen(1.0, 1.0);
  EXPECT_EQ(e.lambda_plus, cplx(-1.0));
  EXPECT_EQ(e.lambda_minus, cplx(-1.0));
  EXPECT_EQ(e.disc, 0.0);
  EXPECT_TRUE(e.near_degenerate);
  e = eigen(2.0, 1.0);
  const long double r3 = std::sqrt(3.0L);
  EXPECT_NEAR(e.lambda_plus.real(), static_cast<double>(-4.0L + 2.0L * r3), 1e-15);
  EXPECT_NEAR(e.lambda_minus.real(), static_cast<double>(-4.0L - 2.0L * r3), 1e-14);
  EXPECT_FALSE(e.near_degenerate);
}

TEST(Eigen, LargeFrequencyAsymptote) {
  const auto e = eigen(100.0, 1.0);
  EXPECT_LE(std::abs(e.lambda_plus.real() + 0.5), 1e-4 * std::abs(e.lambda_plus.real()));
}

TEST(Eigen, TraceDeterminantAndSign) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> lr(-3.0, 3.0);
  for (int i = 0; i < 2000; ++i) {
    const double mu = std::pow(10.0, lr(rng) / 3.0);
    const double r = std::pow(10.0, lr(rng));
    const auto e = eigen(r, mu);
    const cplx prod = e.lambda_plus * e.lambda_minus;
    const cplx sum = e.lambda_plus + e.lambda_minus;
    EXPECT_LE(std::abs(prod - r * r), 1e-12 * r * r);
    EXPECT_LE(std::abs(sum + 2.0 * mu * r * r), 1e-12 * 2.0 * mu * r * r);
    EXPECT_LT(e.lambda_plus.real(), 0.0);
    EXPECT_LT(e.lambda_minus.real(), 0.0);
  }
  EXPECT_EQ(eigen(0.0, 1.0).lambda_plus, cplx(0.0));
}

TEST(Kernels, InitialValues) {
  for (double r : {0.0, 0.5, 1.0, 2.0, 50.0}) {
    const auto k = kernels(eigen(r, 1.0), 0.0);
    EXPECT_EQ(k.p_rr, 1.0);
    EXPECT_EQ(k.phi, 0.0);
    EXPECT_EQ(k.p_dd, 1.0);
  }
}

TEST(Kernels, ConfluentLimit) {
  const auto k = kernels(eigen(1.0, 1.0), 0.3);
  EXPECT_NEAR(k.phi, 0.3 * std::exp(-0.3), 1e-16);
  EXPECT_NEAR(k.p_rr, (1.0 + 0.3) * std::exp(-0.3), 1e-16);
  EXPECT_NEAR(k.p_dd, (1.0 - 0.3) * std::exp(-0.3), 1e-16);
}

TEST(Kernels, DividedDifferenceWithZeroEigenvalue) {
  EXPECT_NEAR(exp_divided_difference(0.0, -1.0, 1.0).real(), 1.0 - std::exp(-1.0), 1e-16);
  EXPECT_NEAR(exp_divided_difference(-1.0, 0.0, 1.0).real(), 1.0 - std::exp(-1.0), 1e-16);
  EXPECT_NEAR(exp_divided_difference(-0.5, -0.5 - 1e-9, 2.0).real(), 2.0 * std::exp(2.0 * (-0.5 - 0.5e-9)), 1e-15);
  // Same value from the 2x2 oracle: the zero eigenvalue shape at r -> 0 with disc > 0.
  const double r = 0.2, mu = 6.0;
  const auto e = eigen(r, mu);
  ASSERT_GT(e.disc, 0.0);
  EXPECT_NEAR(kernels(e, 1.0).phi, exp_divided_difference(e.lambda_plus, e.lambda_minus, 1.0).real(), 1e-15);
  EXPECT_LT(oracle_error(r, mu, 1.0), 1e-10);
}

TEST(Kernels, AgreeWithOdeOracle) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double mu = 0.2 + 1.8 * u01(rng);
    double r = 3.0 / mu * u01(rng);
    if (i % 10 == 0) r = 1.0 / mu + (i % 20 == 0 ? 1e-6 : -1e-6);
    const double t = u01(rng);
    EXPECT_LE(oracle_error(r, mu, t), 1e-8) << "mu=" << mu << " r=" << r << " t=" << t;
  }
}

TEST(Kernels, ContinuousAcrossSeriesSwitch) {
  const double mu = 1.0, t = 0.5;
  // gap = 2 |omega| t crosses kConfluentTolerance; sweep both sides of the switch.
  for (double side : {1.0, -1.0}) {
    for (double delta = 1e-9; delta < 1e-5; delta *= 1.1) {
      const double r = 1.0 + side * delta;
      const auto e = eigen(r, mu);
      const double gap = 2.0 * std::abs(e.omega()) * t;
      if (std::abs(gap - kConfluentTolerance) > 2e-5) continue;
      const double r2 = 1.0 + side * delta * 1.0001;
      const auto a = kernels(e, t);
      const auto b = kernels(eigen(r2, mu), t);
      EXPECT_LT(std::abs(a.phi - b.phi), 1e-10);
      EXPECT_LT(std::abs(a.p_rr - b.p_rr), 1e-10);
      EXPECT_LT(std::abs(a.p_dd - b.p_dd), 1e-10);
    }
  }
}

TEST(Kernels, SeriesMatchesClosedFormInOverlap) {
  const double mu = 1.0, t = 0.5;
  for (double r : {1.0 + 3e-4, 1.0 - 3e-4, 1.0 + 1e-3}) {
    const auto e = eigen(r, mu);
    const auto closed = kernels(e, t);
    ASSERT_FALSE(closed.series);
    const double z = e.disc * t * t;
    const double m = -mu * r * r;
    const double sh = z >= 0 ? std::sinh(std::sqrt(z)) / std::sqrt(z) * t : std::sin(std::sqrt(-z)) / std::sqrt(-z) * t;
    EXPECT_NEAR(closed.phi, std::exp(m * t) * sh, 1e-12);
  }
}

TEST(Kernels, RealForAllRegimes) {
  for (double r : {0.1, 0.5, 0.999, 1.0, 1.001, 3.0, 1000.0}) {
    for (double t : {1e-6, 0.1, 1.0, 10.0}) {
      const auto k = kernels(eigen(r, 1.0), t);
      EXPECT_TRUE(std::isfinite(k.phi) && std::isfinite(k.p_rr) && std::isfinite(k.p_dd));
    }
  }
}

TEST(Kernels, CsvDump) {
  std::ostringstream os;
  const double xs[] = {0.0, 1.0, 2.0};
  write_kernel_csv(os, xs, 1.0, 0.3);
  std::string line;
  std::istringstream is(os.str());
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 4);
  EXPECT_NE(os.str().find("xi_norm,lambda_plus_re"), std::string::npos);
}

TEST(EvolveLinear, IdentityAtZero) {
  std::mt19937_64 rng(23);
  Grid g(16, 32, 5.0);
  State st{random_band_limited(g, rng), VectorField(random_band_limited(g, rng), random_band_limited(g, rng))};
  auto out = LinearPropagator(g, 1.0, 0.0).apply(st);
  EXPECT_LT(max_abs_diff(out.rho, st.rho), 1e-14 * max_abs(st.rho));
  EXPECT_LT(max_abs_diff(out.u.c1(), st.u.c1()), 1e-14 * max_abs(st.u.c1()));
}

TEST(EvolveLinear, SingleDensityModeMatchesOracle) {
  Grid g(16, kTwoPi);
  std::vector<cplx> c(g.size());
  c[g.index_of(2, 0)] = cplx(0.3, 0.7);
  c[g.index_of(-2, 0)] = cplx(0.3, -0.7);
  State st{SpectralField(g, c, true), VectorField::zeros(g)};
  const auto out = evolve_linear(st, 1.0, 0.5);
  const auto o = swnu::testing::ode_propagator(2.0, 1.0, 0.5);
  EXPECT_NEAR(std::abs(out.rho.at(2, 0) / st.rho.at(2, 0) - o[0]), 0.0, 1e-8);
  const double l1 = -4 + 2 * std::sqrt(3.0), l2 = -4 - 2 * std::sqrt(3.0);
  EXPECT_NEAR((out.rho.at(2, 0) / st.rho.at(2, 0)).real(), (l1 * std::exp(l2 * 0.5) - l2 * std::exp(l1 * 0.5)) / (l1 - l2),
              1e-14);
  // d(t) = r Phi rho_0 and u = -i e d.
  const cplx d = cplx(0.0, 1.0) * out.u.c1().at(2, 0);
  EXPECT_NEAR(std::abs(d - o[2] * st.rho.at(2, 0)), 0.0, 1e-8);
}

TEST(EvolveLinear, RotationalModeDecaysLikeHeat) {
  Grid g(32, kTwoPi);
  auto psi = SpectralField::from_function(g, [](double x, double y) { return std::cos(2.0 * x + y); });
  State st{SpectralField::zeros(g), perp_grad(psi)};
  const double t = 0.2;
  const auto out = evolve_linear(st, 1.0, t);
  EXPECT_LT(max_abs(out.rho), 1e-14);
  EXPECT_NEAR(physical_l2_norm(out.u.c1()) + 0.0, std::exp(-5.0 * t) * physical_l2_norm(st.u.c1()), 1e-12);
  EXPECT_NEAR(sobolev_norm(out.u, 0.0), std::exp(-5.0 * t) * sobolev_norm(st.u, 0.0), 1e-12);
}

TEST(EvolveLinear, Semigroup) {
  std::mt19937_64 rng(24);
  Grid g(32, 16, 4.0);
  State st{random_band_limited(g, rng), VectorField(random_band_limited(g, rng), random_band_limited(g, rng))};
  const auto a = evolve_linear(evolve_linear(st, 0.7, 0.13), 0.7, 0.29);
  const auto b = evolve_linear(st, 0.7, 0.42);
  EXPECT_LT(max_abs_diff(a.rho, b.rho), 1e-13 * max_abs(b.rho));
  EXPECT_LT(max_abs_diff(a.u.c2(), b.u.c2()), 1e-13 * max_abs(b.u.c2()));
}

TEST(EvolveLinear, EnergyNonIncreasing) {
  std::mt19937_64 rng(25);
  Grid g(32, 6.0);
  State st{random_band_limited(g, rng), VectorField(random_band_limited(g, rng), random_band_limited(g, rng))};
  for (double sigma : {-1.0, 0.0, 2.5}) {
    NormParams p{sigma, false};
    double prev = state_energy_norm(st, p);
    for (double t = 0.05; t <= 1.0; t += 0.05) {
      const double now = state_energy_norm(evolve_linear(st, 1.0, t), p);
      EXPECT_LE(now, prev * (1.0 + 1e-14));
      prev = now;
    }
  }
}

TEST(TimeDerivative, MatchesFiniteDifference) {
  std::mt19937_64 rng(26);
  Grid g(16, 4.0);
  State st{random_band_limited(g, rng, true, 0.5),
           VectorField(random_band_limited(g, rng, true, 0.5), random_band_limited(g, rng, true, 0.5))};
  const double t = 0.3, h = 1e-5, mu = 1.0;
  const auto d = time_derivative_linear(st, mu, t);
  const auto fd = (1.0 / (2 * h)) * (evolve_linear(st, mu, t + h) - evolve_linear(st, mu, t - h));
  EXPECT_LT(max_abs_diff(d.rho, fd.rho), 1e-7 * max_abs(d.rho));
  EXPECT_LT(max_abs_diff(d.u.c1(), fd.u.c1()), 1e-7 * max_abs(d.u.c1()));
  EXPECT_LT(max_abs_diff(d.u.c2(), fd.u.c2()), 1e-7 * max_abs(d.u.c2()));
}

TEST(TimeDerivative, AtZeroWithRestingVelocity) {
  std::mt19937_64 rng(27);
  Grid g(16, 4.0);
  State st{random_band_limited(g, rng), VectorField::zeros(g)};
  const auto d = time_derivative_linear(st, 1.0, 0.0);
  EXPECT_EQ(max_abs(d.rho), 0.0);
  const auto gr = grad(st.rho);
  EXPECT_LT(max_abs_diff(d.u.c1(), -gr.c1()), 1e-15 * max_abs(gr.c1()));
}

TEST(VAp, InitialValueIsTransportOfData) {
  const double L = 16.0 * std::numbers::pi;
  DataFamilyParams p(3, 2.5);
  Grid g(512, 16, L);
  const auto v = v_ap(p, g, 1.0, 0.0);
  const auto gn = make_gn(p, g);
  const auto gf = grad(make_fn(p, g));
  const auto expect = -(pointwise_product(gn.c1(), gf.c1()) + pointwise_product(gn.c2(), gf.c2()));
  EXPECT_EQ(max_abs_diff(v, expect), 0.0);
}
