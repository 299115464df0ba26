#include <gtest/gtest.h>

#include <cmath>

#include "loschmidt/engine.hpp"
#include "loschmidt/fit.hpp"

namespace loschmidt {
namespace {

EchoSeries model_series(const TimeGrid& grid, std::size_t n, SpinLength spin, double sigma2,
                        double alpha, double beta) {
  EchoSeries s{grid, {}, {}, {}};
  for (double t : grid.samples()) {
    const double lm = phenomenological_log_m(t, n, spin, sigma2, alpha, beta);
    s.log_m.push_back(lm);
    s.m.push_back(std::exp(lm));
  }
  return s;
}

EchoSeries gaussian_in_spin(const TimeGrid& grid, double i) {
  EchoSeries s{grid, {}, {}, {}};
  for (double t : grid.samples()) {
    s.log_m.push_back(-i * t * t);
    s.m.push_back(std::exp(-i * t * t));
  }
  return s;
}

TEST(Fit, RoundTripRecoversParameters) {
  const auto grid = TimeGrid::uniform(3.0 * units::kPi + 0.3, 20000);
  for (int two_i : {1, 3, 9}) {
    const SpinLength spin(two_i);
    const auto s = model_series(grid, 1000, spin, 2e-4, 0.83, 0.41);
    const auto fit = fit_phenomenological(s, 1000, spin, 2e-4);
    EXPECT_TRUE(fit.converged);
    EXPECT_FALSE(fit.degenerate);
    EXPECT_NEAR(fit.alpha_p, 0.83, 1e-8);
    EXPECT_NEAR(fit.beta_p, 0.41, 1e-8);
    EXPECT_LT(fit.residual, 1e-8);
    EXPECT_LT(fit.samples_used, grid.size());  // deep troughs are masked
  }
}

TEST(Fit, ZeroSpreadIsDegenerate) {
  const auto grid = TimeGrid::uniform(3.0, 2000);
  const auto s = model_series(grid, 100, SpinLength(1), 0.0, 0.6, 0.0);
  const auto fit = fit_phenomenological(s, 100, SpinLength(1), 0.0);
  EXPECT_TRUE(fit.degenerate);
  EXPECT_NEAR(fit.alpha_p, 0.6, 1e-10);
  EXPECT_EQ(fit.beta_p, 0.0);
}

TEST(Fit, NegativeCoefficientIsClampedToBoundary) {
  // Growing echo envelope: unconstrained beta would be negative.
  const auto grid = TimeGrid::uniform(6.0, 3000);
  EchoSeries s{grid, {}, {}, {}};
  for (double t : grid.samples()) {
    const double st = std::sin(t);
    const double lm = -50.0 * (0.5 * st * st) + 0.01 * t * t;
    s.log_m.push_back(lm);
    s.m.push_back(std::exp(lm));
  }
  const auto fit = fit_phenomenological(s, 100, SpinLength(1), 0.01);
  EXPECT_GE(fit.alpha_p, 0.0);
  EXPECT_EQ(fit.beta_p, 0.0);
  EXPECT_GT(fit.residual, 0.0);
}

TEST(Fit, RejectsTooFewSamples) {
  const auto grid = TimeGrid::uniform(3.0, 50);
  const auto s = model_series(grid, 100, SpinLength(1), 0.01, 0.5, 0.5);
  EXPECT_THROW(fit_phenomenological(s, 100, SpinLength(1), 0.01), Error);
  EXPECT_THROW(fit_phenomenological(s, 100, SpinLength(1), -1.0), Error);
}

TEST(Fit, EngineRunIsDescribedClosely) {
  SamplingConfig cfg;
  cfg.n = 1000;
  cfg.da_max = 0.025;
  cfg.seed = 3;
  const auto bath = sample_bath(cfg, SpinLength(1), 1.0);
  const auto s = le_hf(bath, TimeGrid::uniform(3.5 * units::kPi, 16385));
  const auto fit = fit_phenomenological(s, bath.size(), bath.spin(), bath.normalized_a_variance());
  EXPECT_TRUE(fit.converged);
  EXPECT_GT(fit.alpha_p, 0.0);
  EXPECT_LT(fit.residual, 0.5);
}

TEST(Collapse, IdenticalRunsCollapsePerfectly) {
  const auto grid = TimeGrid::uniform(3.0, 3000);
  const CollapseRun run{gaussian_in_spin(grid, 0.5), SpinLength(1), 10};
  EXPECT_EQ(collapse_error({run, run}), 0.0);
}

TEST(Collapse, SqrtSpinRescalingMergesGaussianFamily) {
  const auto grid = TimeGrid::uniform(5.0, 20000);
  std::vector<CollapseRun> runs;
  for (int two_i : {1, 3, 5, 9})
    runs.push_back({gaussian_in_spin(grid, two_i / 2.0), SpinLength(two_i), 1000});
  EXPECT_LT(collapse_error(runs), 1e-5);
  EXPECT_GT(collapse_error(runs, {.scale_by_sqrt_i = false}), 0.3);
}

TEST(Collapse, RejectsBadInput) {
  const auto grid = TimeGrid::uniform(3.0, 300);
  const CollapseRun a{gaussian_in_spin(grid, 0.5), SpinLength(1), 10};
  const CollapseRun b{gaussian_in_spin(grid, 0.5), SpinLength(1), 20};
  EXPECT_THROW(collapse_error({a}), Error);
  EXPECT_THROW(collapse_error({a, b}), Error);
}

}  // namespace
}  // namespace loschmidt
