#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "error.hpp"
#include "mcstats.hpp"
#include "randpath.hpp"

using namespace nak;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  double se = 0.0;
};

Moments moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  Moments m;
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  for (double v : x) m.var += (v - m.mean) * (v - m.mean);
  m.var /= n - 1.0;
  m.se = std::sqrt(m.var / n);
  return m;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST(SampleBmDrift, SingleStepHasVarianceTwo) {
  std::vector<double> ends;
  for (std::uint64_t s = 0; s < 100000; ++s)
    ends.push_back(sample_bm_drift(1, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 1.0, 1, s).at(1)(0));
  const Moments m = moments(ends);
  EXPECT_NEAR(m.mean, 0.0, 3.0 * m.se);
  // se of the sample variance of a Gaussian is var * sqrt(2 / (n - 1))
  EXPECT_NEAR(m.var, 2.0, 3.0 * 2.0 * std::sqrt(2.0 / 99999.0));
}

TEST(SampleBmDrift, StartsAtStartAndRejectsBadHorizon) {
  const Eigen::Vector2d start(3.0, 5.0);
  EXPECT_THROW(sample_bm_drift(2, start, Eigen::Vector2d::Zero(), 0.0, 10, 1), Error);
  EXPECT_THROW(sample_bm_drift(2, start, Eigen::Vector2d::Zero(), 1.0, 0, 1), Error);
  const DiscretePath p = sample_bm_drift(2, start, Eigen::Vector2d::Zero(), 1.0, 1000, 1);
  EXPECT_EQ(p.size(), 1001u);
  EXPECT_EQ(p.at(0), start);
  EXPECT_DOUBLE_EQ(p.grid().front(), 0.0);
  EXPECT_DOUBLE_EQ(p.horizon(), 1.0);
}

TEST(SampleBmDrift, DriftedEndpointMean) {
  std::vector<double> ends;
  for (std::uint64_t s = 0; s < 100000; ++s)
    ends.push_back(
        sample_bm_drift(1, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, -2.0), 4.0, 400, s)
            .at(400)(0));
  const Moments m = moments(ends);
  EXPECT_NEAR(m.mean, -8.0, 3.0 * m.se);
}

TEST(SampleBmDrift, PooledIncrementVariance) {
  const DiscretePath p =
      sample_bm_drift(2, Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), 5.0, 50000, 11);
  std::vector<double> inc;
  const double dt = 5.0 / 50000.0;
  for (std::size_t i = 1; i < p.size(); ++i)
    for (Eigen::Index c = 0; c < 2; ++c) inc.push_back((p.at(i)(c) - p.at(i - 1)(c)) / std::sqrt(dt));
  const Moments m = moments(inc);
  EXPECT_NEAR(m.var, 2.0, 3.0 * 2.0 * std::sqrt(2.0 / static_cast<double>(inc.size() - 1)));
}

TEST(SampleBmDrift, SeedDeterminism) {
  const auto a = sample_bm_drift(3, Eigen::Vector3d::Zero(), Eigen::Vector3d(1, 2, 3), 2.0, 100, 42);
  const auto b = sample_bm_drift(3, Eigen::Vector3d::Zero(), Eigen::Vector3d(1, 2, 3), 2.0, 100, 42);
  const auto c = sample_bm_drift(3, Eigen::Vector3d::Zero(), Eigen::Vector3d(1, 2, 3), 2.0, 100, 43);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_NE(a.values(), c.values());
  EXPECT_EQ(a.seed(), 42u);
}

TEST(DiscretePath, TruncateAndWindow) {
  const auto p = sample_bm_drift(1, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 1.0, 10, 3);
  const auto t = p.truncated(0.55);
  EXPECT_DOUBLE_EQ(t.horizon(), 0.55);
  EXPECT_NEAR(t.at(t.size() - 1)(0), p.value_at(0.55)(0), 1e-15);
  const auto w = p.window(0.2, 0.7);
  EXPECT_DOUBLE_EQ(w.grid().front(), 0.0);
  EXPECT_NEAR(w.horizon(), 0.5, 1e-15);
  EXPECT_NEAR(w.at(0)(0), p.value_at(0.2)(0), 1e-15);
}

TEST(RefinePath, KeepsOriginalNodesAndBoundsIncrements) {
  const auto p = sample_bm_drift(1, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 1.0, 4, 5);
  const auto r = refine_path(p, 0.05, 9);
  EXPECT_GT(r.size(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_DOUBLE_EQ(r.value_at(p.grid()[i])(0), p.at(i)(0));
}

TEST(SampleBridge, MidpointMomentsUnitClock) {
  std::vector<double> mid;
  for (std::uint64_t s = 0; s < 100000; ++s) mid.push_back(sample_bridge({0.0, 0.0, 1.0, {0.5}}, s)[0]);
  const Moments m = moments(mid);
  EXPECT_NEAR(m.mean, 0.0, 3.0 * m.se);
  EXPECT_NEAR(m.var, 0.5, 3.0 * 0.5 * std::sqrt(2.0 / 99999.0));
}

TEST(SampleBridge, EndpointPinnedExactly) {
  const double a = 0.3719;
  for (std::uint64_t s = 0; s < 20; ++s) EXPECT_EQ(sample_bridge({a, a, 2.5, {1.0, 2.5}}, s)[1], a);
}

TEST(SampleBridge, LinearMean) {
  std::vector<double> v;
  for (std::uint64_t s = 0; s < 50000; ++s) v.push_back(sample_bridge({0.0, 4.0, 2.0, {1.0}}, s)[0]);
  const Moments m = moments(v);
  EXPECT_NEAR(m.mean, 2.0, 3.0 * m.se);
}

TEST(SampleBridge, RejectsBadSpecs) {
  EXPECT_THROW(sample_bridge({0.0, 1.0, 0.0, {}}, 1), Error);
  EXPECT_THROW(sample_bridge({0.0, 1.0, 1.0, {0.5, 0.4}}, 1), Error);
  EXPECT_THROW(sample_bridge({0.0, 1.0, 1.0, {1.5}}, 1), Error);
}

TEST(SampleBridge, TwoSegmentConsistency) {
  // value at clock 1 of a bridge on [0, 2] ending at 1, sampled directly and by
  // first sampling clock 1.5 then the sub-bridge on [0, 1.5]
  std::vector<double> direct, composed;
  for (std::uint64_t s = 0; s < 20000; ++s) {
    direct.push_back(sample_bridge({0.0, 1.0, 2.0, {1.0}}, derive_seed(1, s))[0]);
    const double mid = sample_bridge({0.0, 1.0, 2.0, {1.5}}, derive_seed(2, s))[0];
    composed.push_back(sample_bridge({0.0, mid, 1.5, {1.0}}, derive_seed(3, s))[0]);
  }
  EXPECT_LE(ks_two_sample(direct, composed), 0.02);
}

TEST(PhiCdf, Values) {
  EXPECT_DOUBLE_EQ(phi_cdf(0.0), 0.5);
  EXPECT_GT(phi_cdf(20.0), 1.0 - 1e-12);
  EXPECT_NEAR(phi_cdf(1.4142135623), 0.8413447, 1e-7);
  EXPECT_NEAR(phi_cdf(std::sqrt(2.0)), normal_cdf(1.0), 1e-15);
}

TEST(PhiCdf, SymmetryAndRange) {
  Rng rng(99);
  double prev_x = -11.0, prev = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = -10.0 + 20.0 * rng.uniform();
    EXPECT_NEAR(phi_cdf(x) + phi_cdf(-x), 1.0, 1e-14);
    EXPECT_GE(phi_cdf(x), 0.0);
    EXPECT_LE(phi_cdf(x), 1.0);
    EXPECT_NEAR(phi_cdf(x), normal_cdf(x / std::sqrt(2.0)), 1e-14);
  }
  for (int i = 0; i <= 200; ++i) {
    const double x = -10.0 + 0.1 * i;
    if (i) {
      EXPECT_GE(phi_cdf(x), prev) << x << " " << prev_x;
    }
    prev = phi_cdf(x);
    prev_x = x;
  }
}

TEST(DeriveSeed, IndependentOfRequestOrder) {
  std::vector<std::uint64_t> fwd, bwd(100);
  for (std::uint64_t i = 0; i < 100; ++i) fwd.push_back(derive_seed(5, i));
  for (std::uint64_t i = 100; i-- > 0;) bwd[i] = derive_seed(5, i);
  EXPECT_EQ(fwd, bwd);
  EXPECT_NE(derive_seed(5, 0), derive_seed(6, 0));
}
