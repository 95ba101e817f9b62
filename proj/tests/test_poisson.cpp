#include <gtest/gtest.h>

#include <cmath>

#include "error.hpp"
#include "liegroup.hpp"
#include "poisson.hpp"
#include "rng.hpp"

using namespace nak;

namespace {

MetaAbelianGroup heis(Eigen::Vector2d alpha = {1.0, 1.0}) {
  return heisenberg_instance(1, Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), alpha);
}

PoissonArgs small_args() {
  PoissonArgs a;
  a.horizon = 4.0;
  a.n_sigma = 64;
  a.n_eta = 8;
  a.steps_per_unit = 20;
  a.seed = 11;
  return a;
}

}  // namespace

TEST(PoissonArgs, Validation) {
  PoissonArgs a = small_args();
  EXPECT_NO_THROW(validate(a));
  a.n_sigma = 1;
  EXPECT_THROW(validate(a), Error);
  a = small_args();
  a.horizon = 0.0;
  EXPECT_THROW(validate(a), Error);
  a = small_args();
  a.steps_per_unit = 1;
  EXPECT_THROW(validate(a), Error);
}

TEST(FitDecay, ExactPowerLaw) {
  const std::vector<double> r{0.0, 1.0, 3.0, 7.0, 15.0};
  std::vector<double> v, se;
  for (double x : r) {
    v.push_back(5.0 * std::pow(1.0 + x, -2.5));
    se.push_back(0.1 * v.back());
  }
  const auto w = fit_decay(r, v, se);
  EXPECT_NEAR(w.slope, -2.5, 1e-12);
  EXPECT_NEAR(w.intercept, std::log(5.0), 1e-12);
  EXPECT_GT(w.slope_std_error, 0.0);
  const auto u = fit_decay(r, v, std::vector<double>(r.size(), 0.0));
  EXPECT_NEAR(u.slope, -2.5, 1e-12);
}

TEST(FitDecay, OrdinaryLeastSquaresWithUnitWeights) {
  // points (0, 0), (1, 1), (2, 1) in (x, y): slope 1/2
  const std::vector<double> r{0.0, std::exp(1.0) - 1.0, std::exp(2.0) - 1.0};
  const std::vector<double> v{1.0, std::exp(1.0), std::exp(1.0)};
  EXPECT_NEAR(fit_decay(r, v, std::vector<double>(3, 0.0)).slope, 0.5, 1e-12);
}

TEST(FitDecay, Rejects) {
  const std::vector<double> one{1.0};
  EXPECT_THROW(fit_decay(one, one, one), Error);
  const std::vector<double> r{1.0, 0.5}, v{1.0, 1.0}, se{0.1, 0.1};
  EXPECT_THROW(fit_decay(r, v, se), Error);
  const std::vector<double> r2{0.5, 1.0}, bad{1.0, -1.0};
  EXPECT_THROW(fit_decay(r2, bad, se), Error);
}

TEST(EstimateNu, PositiveAndWorkerInvariant) {
  const auto g = heis();
  const auto x = heisenberg_point(Eigen::VectorXd::Constant(1, 0.3), Eigen::VectorXd::Constant(1, -0.2), 0.1);
  PoissonArgs a = small_args();
  const auto e1 = estimate_nu(g, x, a);
  a.workers = 3;
  const auto e3 = estimate_nu(g, x, a);
  EXPECT_GT(e1.value.mean, 0.0);
  EXPECT_EQ(e1.value.mean, e3.value.mean);
  EXPECT_EQ(e1.half_value.mean, e3.half_value.mean);
  EXPECT_EQ(e1.value.count, 64u);
  EXPECT_NEAR(e1.diff_mean, e1.value.mean - e1.half_value.mean, 1e-12 * e1.value.mean);
  const bool conv = std::abs(e1.value.mean - e1.half_value.mean) <=
                    3.0 * std::hypot(e1.value.std_error, e1.half_value.std_error);
  EXPECT_EQ(e1.converged, conv);
}

TEST(EstimateNu, DivergentDrift) {
  const auto g = heis(Eigen::Vector2d(1, -2));
  try {
    estimate_nu(g, g.identity(), small_args());
    FAIL() << "divergent drift accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DivergentDrift);
  }
}

TEST(EstimateNu, ScalingRouteAgreesWithDirect) {
  const auto g = heis();
  const Eigen::Vector2d rho(1, 2);
  // unit rho-norm point
  const auto x0 = heisenberg_point(Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 0.5), -0.3);
  ASSERT_NEAR(g.homogeneous_norm(rho, x0), 1.0, 1e-14);
  PoissonArgs a = small_args();
  a.n_sigma = 256;
  const auto direct = nu_srho(g, x0, -0.4, rho, a);
  const auto scaled = nu_srho_scaled(g, x0, -0.4, rho, a);
  EXPECT_NEAR(direct.value.mean, scaled.value.mean,
              3.0 * std::hypot(direct.value.std_error, scaled.value.std_error));
  EXPECT_LE((direct.point.m - scaled.point.m).norm(), 1e-14);
  EXPECT_THROW(nu_srho(g, x0, 0.5, rho, a), Error);
}

TEST(DecayRegression, ShapesAndSeeds) {
  const auto g = heis();
  const Eigen::Vector2d rho(1, 1);
  const auto dir = heisenberg_point(Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Zero(1), 0.0);
  const std::vector<double> radii{1.0, 2.0, 4.0};
  PoissonArgs a = small_args();
  a.n_sigma = 32;
  const auto fit = decay_regression(g, dir, rho, radii, a);
  ASSERT_EQ(fit.estimates.size(), 3u);
  ASSERT_EQ(fit.included.size(), 3u);
  EXPECT_LE((fit.estimates[2].point.v - Eigen::VectorXd::Constant(1, 4.0)).norm(), 1e-14);
  PoissonArgs b = a;
  b.seed = derive_seed(a.seed, 1);
  const auto single = estimate_nu(g, g.dilate(rho, 2.0, dir), b);
  EXPECT_EQ(single.value.mean, fit.estimates[1].value.mean);
}
