#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "dynetrack/constants.hpp"
#include "dynetrack/control.hpp"
#include "dynetrack/errors.hpp"
#include "dynetrack/estimation.hpp"

using namespace dynetrack;

TEST(AdaptiveEstimate, Examples) {
  EXPECT_DOUBLE_EQ(adaptive_estimate(kPi / 2), 0.0);
  EXPECT_DOUBLE_EQ(adaptive_estimate(kPi), kPi / 2);
  for (double e : {-5.0, -0.3, 0.0, 1.7, 40.0}) {
    EXPECT_NEAR(adaptive_estimate(e + kPi / 2), e, 1e-13);
  }
}

TEST(ImmediateVariance, Examples) {
  EXPECT_DOUBLE_EQ(immediate_variance(1.0, 0.25), 1.0);
  EXPECT_DOUBLE_EQ(immediate_variance(10.0, 1.0), 0.0025);
  EXPECT_NEAR(immediate_variance(1.0, 1e-9), 2.5e8, 1e-4);
  EXPECT_THROW(immediate_variance(1.0, 0.0), ConfigError);
  EXPECT_THROW(immediate_variance(0.0, 1.0), ConfigError);
}

TEST(InflateVariance, Examples) {
  EXPECT_DOUBLE_EQ(inflate_variance(0.05, 1.0, 0.01), 0.06);
  EXPECT_EQ(inflate_variance(0.3, 0.0, 5.0), 0.3);
  EXPECT_EQ(inflate_variance(0.0, 1.0, 1.0), 1.0);
}

TEST(CombineEstimates, EqualInputsHalveVariance) {
  const Estimate e = combine_estimates(0.7, 0.2, 0.7, 0.2);
  EXPECT_DOUBLE_EQ(e.value, 0.7);
  EXPECT_DOUBLE_EQ(e.variance, 0.1);
}

TEST(CombineEstimates, SymmetricWeighting) {
  const Estimate e = combine_estimates(1.0, 1.0, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(e.value, 0.5);
  EXPECT_DOUBLE_EQ(e.variance, 0.5);
}

TEST(CombineEstimates, UninformativeSideIgnored) {
  const double inf = std::numeric_limits<double>::infinity();
  const Estimate a = combine_estimates(0.3, 0.1, 9.0, inf);
  EXPECT_EQ(a.value, 0.3);
  EXPECT_EQ(a.variance, 0.1);
  const Estimate b = combine_estimates(9.0, inf, 0.3, 0.1);
  EXPECT_EQ(b.value, 0.3);
  EXPECT_EQ(b.variance, 0.1);
}

TEST(CombineEstimates, HarmonicSumAndSymmetry) {
  const Estimate e = combine_estimates(0.1, 0.06, -0.2, 0.03);
  EXPECT_NEAR(e.variance, 0.02, 1e-16);
  const Estimate f = combine_estimates(-0.2, 0.03, 0.1, 0.06);
  EXPECT_DOUBLE_EQ(e.value, f.value);
  EXPECT_DOUBLE_EQ(e.variance, f.variance);
  EXPECT_THROW(combine_estimates(0.0, 0.0, 0.0, 1.0), ConfigError);
}

TEST(FilterUpdate, NoiselessFixtureHoldsEstimate) {
  // phi constant, no shot noise, LO in quadrature with phi_hat = phi: the
  // window current is 2 alpha cos(pi/2) delta_t.
  const double phi = 0.4, alpha = 10.0, dt = 1e-3;
  FilterState s{phi, 0.5};
  double prev = s.sigma2;
  for (int k = 0; k < 1000; ++k) {
    const double I = 2 * alpha * std::cos(s.phi_hat + kPi / 2 - phi) * dt;
    s = filter_update(s, I, dt, 0.0, alpha);
    ASSERT_NEAR(s.phi_hat, phi, 1e-12);
    ASSERT_LT(s.sigma2, prev);
    prev = s.sigma2;
  }
}

TEST(FilterUpdate, VarianceConvergesToStationaryValue) {
  FilterState s{0.0, 1.0};
  for (int k = 0; k < 100'000; ++k) s = filter_update(s, 0.0, 1e-3, 1.0, 10.0);
  EXPECT_NEAR(s.sigma2, 0.05, 0.05 * 0.01);
}

TEST(FilterUpdate, SingleStepHarmonicSum) {
  // Prior 0.06 (no diffusion), immediate variance 1/(4 alpha^2 dt) = 0.03.
  const double alpha = 1.0, dt = 1.0 / (4 * 0.03);
  const FilterState n = filter_update(FilterState{0.0, 0.06}, 0.0, dt, 0.0, alpha);
  EXPECT_NEAR(n.sigma2, 0.02, 1e-15);
}

TEST(FilterUpdate, WindowOverloadMatchesExplicit) {
  FilterState s{0.1, 0.2};
  s.push(0.003, 1e-3);
  s.push(-0.001, 1e-3);
  const FilterState a = filter_update(s, 1.0, 5.0);
  const FilterState b = filter_update(FilterState{0.1, 0.2}, 0.002, 2e-3, 1.0, 5.0);
  EXPECT_EQ(a.phi_hat, b.phi_hat);
  EXPECT_EQ(a.sigma2, b.sigma2);
  EXPECT_EQ(a.window_length, 0.0);
}

TEST(FilterUpdate, TracksRiccatiToFirstOrder) {
  const double alpha = 10.0, kappa = 1.0, horizon = 0.5;
  auto gap = [&](double dt) {
    FilterState f{0.0, 0.5};
    double r = 0.5, worst = 0.0;
    const int steps = static_cast<int>(std::lround(horizon / dt));
    for (int k = 0; k < steps; ++k) {
      f = filter_update(f, 0.0, dt, kappa, alpha);
      r = riccati_step(r, kappa, alpha, dt);
      worst = std::max(worst, std::abs(f.sigma2 - r) / r);
    }
    return worst;
  };
  const double g1 = gap(1e-3), g2 = gap(5e-4);
  EXPECT_NEAR(g2 / g1, 0.5, 0.1);
}

TEST(DemodStep, DecaysWithoutSignal) {
  DemodState s{{1.0, 0.5}, 3.0};
  const double dt = 1e-5;
  for (int k = 0; k < 100'000; ++k) s = demod_step(s, 0.3 * k, 0.0, dt);
  EXPECT_NEAR(std::abs(s.acc) / std::abs(std::complex<double>{1.0, 0.5}), std::exp(-3.0), 1e-4);
}

TEST(DemodStep, NoiselessArgConvergesToPhase) {
  const double phi = 0.9, alpha = 5.0, delta = 2000.0, lambda = 5.0, dt = 1e-5;
  DemodState s{{0.0, 0.0}, lambda};
  for (int k = 0; k < 200'000; ++k) {
    const double lo = delta * k * dt;
    s = demod_step(s, lo, 2 * alpha * std::cos(lo - phi) * dt, dt);
  }
  EXPECT_NEAR(heterodyne_estimate(s), phi, 1e-2);
}

TEST(DefaultDemodRate, Value) { EXPECT_DOUBLE_EQ(default_demod_rate(2.0, 3.0), 6.0); }

TEST(HeterodyneEstimate, BranchConvention) {
  EXPECT_EQ(heterodyne_estimate({{1.0, 0.0}, 1.0}), 0.0);
  EXPECT_DOUBLE_EQ(heterodyne_estimate({{0.0, 1.0}, 1.0}), kPi / 2);
  EXPECT_DOUBLE_EQ(heterodyne_estimate({{-1.0, 0.0}, 1.0}), kPi);
  EXPECT_DOUBLE_EQ(heterodyne_estimate({{-1.0, -0.0}, 1.0}), kPi);
  EXPECT_THROW(heterodyne_estimate({{0.0, 0.0}, 1.0}), NoSignalError);
}

TEST(UnwrapNearest, PicksClosestBranch) {
  EXPECT_NEAR(unwrap_nearest(3.0, -3.0), 3.0 - kTwoPi, 1e-15);
  EXPECT_NEAR(unwrap_nearest(0.1, 4 * kPi), 0.1 + 4 * kPi, 1e-14);
  EXPECT_EQ(unwrap_nearest(0.5, 0.4), 0.5);
}
