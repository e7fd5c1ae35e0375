#include <gtest/gtest.h>

#include <cmath>

#include "dynetrack/analytics.hpp"
#include "dynetrack/constants.hpp"
#include "dynetrack/control.hpp"
#include "dynetrack/errors.hpp"

using namespace dynetrack;

TEST(HeterodyneLoPhase, Examples) {
  EXPECT_DOUBLE_EQ(heterodyne_lo_phase(0.0, 100.0, 0.3), 0.3);
  EXPECT_DOUBLE_EQ(heterodyne_lo_phase(0.02, 100.0, 0.0), 2.0);
  EXPECT_NEAR(heterodyne_lo_phase(kTwoPi / 37.0, 37.0, 0.5) - 0.5, kTwoPi, 1e-14);
}

TEST(AdaptiveLoStep, Examples) {
  EXPECT_EQ(adaptive_lo_step(1.0, 0.0, 123.0, 4.5), 1.0);
  EXPECT_DOUBLE_EQ(adaptive_lo_step(0.0, 0.04, 2.0, 1.0), 0.04);
}

TEST(OptimalGain, Examples) {
  EXPECT_DOUBLE_EQ(optimal_gain(1.0, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(optimal_gain(1.0, 20.0), 40.0);
}

TEST(OptimalGain, MinimizesMseVsGain) {
  const double kappa = 1.3, alpha = 7.0;
  double best_chi = 0.0, best = 1e300;
  for (double lc = 0.0; lc < 6.0; lc += 1e-4) {
    const double chi = std::exp(lc);
    const double v = mse_vs_gain(chi, kappa, alpha);
    if (v < best) {
      best = v;
      best_chi = chi;
    }
  }
  EXPECT_NEAR(std::log(best_chi), std::log(optimal_gain(kappa, alpha)), 2e-4);
}

TEST(OptimalGainPhysical, SinglePhotonPerCoherenceTime) {
  const double kappa = 3.0, omega = 2e15;
  EXPECT_NEAR(optimal_gain_physical(kappa, kHbar * omega * kappa, omega), 2.0 * kappa, 1e-12);
}

TEST(OptimalGainPhysical, MatchesDimensionlessForm) {
  const double kappa = 1e4, omega = 1.216e15, power = 1e-9;
  const double alpha = std::sqrt(power / (kHbar * omega));
  EXPECT_NEAR(optimal_gain_physical(kappa, power, omega) / optimal_gain(kappa, alpha), 1.0, 1e-14);
  EXPECT_NEAR(optimal_gain_physical(kappa, 4 * power, omega) /
                  optimal_gain_physical(kappa, power, omega),
              2.0, 1e-14);
  EXPECT_THROW(optimal_gain_physical(kappa, -1.0, omega), ConfigError);
}

TEST(RiccatiStep, StationaryPointUnchanged) {
  const double n = 100.0, alpha = 10.0;
  EXPECT_DOUBLE_EQ(riccati_step(1.0 / (2.0 * std::sqrt(n)), 1.0, alpha, 1e-3),
                   1.0 / (2.0 * std::sqrt(n)));
}

TEST(RiccatiStep, PureDiffusion) { EXPECT_DOUBLE_EQ(riccati_step(1.0, 1.0, 0.0, 0.1), 1.1); }

TEST(RiccatiStep, ConvergesToFixedPoint) {
  const double alpha = 10.0, dt = 1e-4;  // N = 100, chi_opt = 20
  double s = 1.0;
  for (int k = 0; k < 50'000; ++k) s = riccati_step(s, 1.0, alpha, dt);
  EXPECT_NEAR(s, 0.05, 0.05 * 1e-3);
}

TEST(RiccatiStep, ContractsTowardsFixedPoint) {
  const double alpha = 10.0, dt = 1e-3;
  double lo = 0.001, hi = 0.5;
  double gap = hi - lo;
  for (int k = 0; k < 500; ++k) {
    lo = riccati_step(lo, 1.0, alpha, dt);
    hi = riccati_step(hi, 1.0, alpha, dt);
    const double g = std::abs(hi - lo);
    ASSERT_LE(g, gap + 1e-15);
    gap = g;
  }
  EXPECT_LT(gap, 1e-6);
}

TEST(RiccatiStep, OvershootIsStiffness) {
  EXPECT_THROW(riccati_step(10.0, 1.0, 10.0, 0.01), StiffnessError);
}

TEST(KalmanGain, StationaryValueMatchesFeedbackLaw) {
  const double kappa = 1.0, alpha = 1.0;
  const double s = std::sqrt(kappa) / (2 * alpha);
  EXPECT_DOUBLE_EQ(kalman_gain(s, alpha), std::sqrt(kappa));
  // LO update 2 alpha sigma^2 I dt equals the fixed-gain update at chi_opt.
  EXPECT_DOUBLE_EQ(kalman_gain(s, alpha), optimal_gain(kappa, alpha) / (2 * alpha));
  EXPECT_EQ(kalman_gain(0.0, alpha), 0.0);
}

TEST(SqueezedGain, ScalesAsInverseRootS) {
  EXPECT_DOUBLE_EQ(squeezed_gain(1.0, 20.0, 0.25), 80.0);
  EXPECT_THROW(squeezed_gain(1.0, 20.0, 0.0), ConfigError);
}

TEST(ControllerSpecValidation, Ranges) {
  EXPECT_NO_THROW(validate(ControllerSpec::fixed_gain(40.0), 1.0, 20.0));
  EXPECT_THROW(validate(ControllerSpec::fixed_gain(0.0), 1.0, 20.0), ConfigError);
  EXPECT_THROW(validate(ControllerSpec::kalman(-1.0), 1.0, 20.0), ConfigError);
  EXPECT_NO_THROW(validate(ControllerSpec::heterodyne(2000.0), 1.0, 20.0));
  EXPECT_THROW(validate(ControllerSpec::heterodyne(100.0), 1.0, 20.0), ConfigError);
}
