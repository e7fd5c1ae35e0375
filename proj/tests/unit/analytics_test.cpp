#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "dynetrack/analytics.hpp"
#include "dynetrack/constants.hpp"
#include "dynetrack/control.hpp"

using namespace dynetrack;

TEST(MseAdaptiveCoherent, Examples) {
  EXPECT_DOUBLE_EQ(mse_adaptive_coherent(1.0), 0.5);
  EXPECT_DOUBLE_EQ(mse_adaptive_coherent(100.0), 0.05);
  EXPECT_DOUBLE_EQ(mse_adaptive_coherent(1e4), 0.005);
}

TEST(MseHeterodyne, Examples) {
  EXPECT_NEAR(mse_heterodyne(1.0), 0.7071, 1e-4);
  EXPECT_DOUBLE_EQ(mse_heterodyne(200.0), 0.05);
  for (double n : {1.0, 17.0, 400.0, 3e6}) {
    EXPECT_NEAR(mse_adaptive_coherent(n) / mse_heterodyne(n), 1.0 / std::sqrt(2.0), 1e-15);
  }
}

TEST(MseVsGain, Examples) {
  EXPECT_DOUBLE_EQ(mse_vs_gain(2.0, 1.0, 1.0), 0.5);
  EXPECT_NEAR(mse_vs_gain(8e6, 1.0, 1.0), 1e6, 1.0);
  const double alpha = 20.0;
  const double chi = optimal_gain(1.0, alpha);
  EXPECT_NEAR(mse_vs_gain(2 * chi, 1.0, alpha) / mse_adaptive_coherent(400), 1.25, 1e-15);
}

TEST(MseVsGain, IdentityAndReciprocalSymmetry) {
  for (double kappa : {0.2, 1.0, 9.0}) {
    for (double alpha : {0.3, 4.0, 100.0}) {
      const double chi = optimal_gain(kappa, alpha);
      const double ref = mse_adaptive_coherent(alpha * alpha / kappa);
      EXPECT_NEAR(mse_vs_gain(chi, kappa, alpha), ref, 4 * ref * 1e-16);
      for (double r : {0.3, 1.7, 5.0}) {
        const double up = mse_vs_gain(r * chi, kappa, alpha);
        EXPECT_NEAR(up, mse_vs_gain(chi / r, kappa, alpha), up * 1e-14);
      }
    }
  }
}

TEST(GainMismatchThreshold, BreakevenWithHeterodyne) {
  const double r = gain_mismatch_threshold();
  EXPECT_DOUBLE_EQ(r, 1.0 + std::sqrt(2.0));
  const double alpha = 20.0, n = 400.0;
  const double chi = optimal_gain(1.0, alpha);
  EXPECT_NEAR(mse_vs_gain(r * chi, 1.0, alpha), mse_heterodyne(n), 1e-15);
  EXPECT_NEAR(mse_vs_gain(chi / r, 1.0, alpha), mse_heterodyne(n), 1e-15);
  EXPECT_LT(mse_vs_gain(2 * chi, 1.0, alpha), mse_heterodyne(n));
}

TEST(MseAdaptiveSqueezed, Examples) {
  EXPECT_EQ(mse_adaptive_squeezed(1.0, 37.0).mse, mse_adaptive_coherent(37.0));
  EXPECT_DOUBLE_EQ(mse_adaptive_squeezed(0.25, 100.0).mse, 0.025);
  EXPECT_NEAR(mse_adaptive_squeezed(0.5, 1000.0).mse, 0.01118, 1e-5);
  EXPECT_TRUE(mse_adaptive_squeezed(0.5, 1000.0).moderate);
}

TEST(MseAdaptiveSqueezed, FlagsStrongSqueezing) {
  const double n = 1e3;  // 5 N^(-1/3) = 0.5
  const auto strong = mse_adaptive_squeezed(0.1, n);
  EXPECT_FALSE(strong.moderate);
  EXPECT_DOUBLE_EQ(strong.mse, std::sqrt(0.1) / (2 * std::sqrt(n)));
}

TEST(MseAdaptiveSqueezed, QuantumLimitSlope) {
  auto f = [](double n) { return mse_adaptive_squeezed(std::pow(n, -1.0 / 3.0), n).mse; };
  const double slope = std::log(f(1e5) / f(1e2)) / std::log(1e3);
  EXPECT_NEAR(slope, -2.0 / 3.0, 1e-12);
}

TEST(PhotonsPerCoherenceTime, Examples) {
  const double omega = 1.216e15, kappa = 1e4;
  EXPECT_NEAR(photons_per_coherence_time(kHbar * omega * kappa, omega, kappa), 1.0, 1e-12);
  EXPECT_NEAR(photons_per_coherence_time(2e-9, omega, kappa) /
                  photons_per_coherence_time(1e-9, omega, kappa),
              2.0, 1e-14);
  EXPECT_NEAR(photons_per_coherence_time(1e-9, omega, kappa), 7.8e5, 0.01e5);
}

TEST(SqlTable, CwDyneNonclassicalAdaptiveBeatsSql) {
  const auto e = sql_table(Mode::kCW, Detection::kDyne, Source::kNonclassical, Adaptivity::kAdaptive);
  EXPECT_TRUE(e.beats_sql);
  EXPECT_EQ(e.law.form, ScalingLaw::Form::kScaling);
  EXPECT_DOUBLE_EQ(e.law.exponent(), 2.0 / 3.0);
  EXPECT_FALSE(e.law.known_constant());
}

TEST(SqlTable, SingleShotDyneCoherentNonadaptive) {
  const auto e =
      sql_table(Mode::kSingleShot, Detection::kDyne, Source::kCoherent, Adaptivity::kNonadaptive);
  EXPECT_EQ(to_string(e.law), "0.5/nbar");
  EXPECT_FALSE(e.beats_sql);
}

TEST(SqlTable, CwInterferometricNonclassicalUnknown) {
  const auto e = sql_table(Mode::kCW, Detection::kInterferometric, Source::kNonclassical,
                           Adaptivity::kAdaptive);
  EXPECT_EQ(e.law.form, ScalingLaw::Form::kUnknown);
  EXPECT_EQ(to_string(e.law), "?");
}

TEST(SqlTable, CsvCarriesReferenceConstants) {
  std::ostringstream out;
  write_sql_table_csv(out);
  const std::string csv = out.str();
  EXPECT_NE(csv.find("CW,adaptive,0.5/N^0.5,"), std::string::npos) << csv;
  for (const char* c : {"0.5/", "0.71/", "0.66/", "0.25/"}) {
    EXPECT_NE(csv.find(c), std::string::npos) << c;
  }
  int lines = 0;
  for (char ch : csv) lines += ch == '\n';
  EXPECT_EQ(lines, 5);
}
