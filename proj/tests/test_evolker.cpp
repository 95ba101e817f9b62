#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "error.hpp"
#include "evolker.hpp"

using namespace nak;

namespace {

DiscretePath zero_path(Eigen::Index dim, double horizon, std::size_t steps) {
  return DiscretePath(uniform_grid(horizon, steps), Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(steps + 1)),
                      0);
}

double normal_pdf(double x, double var) {
  return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

MetaAbelianGroup heis(bool abelian = false) {
  MetaAbelianGroup::Options opts;
  opts.allow_abelian = abelian;
  return heisenberg_instance(1, Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), Eigen::Vector2d(1, 1),
                             std::nullopt, opts);
}

}  // namespace

TEST(GaussianKernel, OneDimensionalHeat) {
  const GaussianKernel k(Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Zero(1));
  EXPECT_NEAR(k.density(Eigen::VectorXd::Zero(1)), 1.0 / std::sqrt(4.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(k.density(Eigen::VectorXd::Constant(1, 1.3)), normal_pdf(1.3, 2.0), 1e-15);
  EXPECT_NEAR(k.log_det_A(), std::log(2.0), 1e-15);
}

TEST(GaussianKernel, CorrelatedTwoDimensional) {
  Eigen::Matrix2d A;
  A << 2.0, 0.6, 0.6, 1.0;
  const Eigen::Vector2d B(0.5, -1.0), x(1.0, 0.2);
  const GaussianKernel k(A, B);
  const double det = 2.0 - 0.36;
  const Eigen::Vector2d d = x - B;
  // inverse of [[a, b], [b, c]] is [[c, -b], [-b, a]] / det
  const double q = (1.0 * d(0) * d(0) - 2 * 0.6 * d(0) * d(1) + 2.0 * d(1) * d(1)) / det;
  EXPECT_NEAR(k.density(x), std::exp(-q / 2) / (2 * std::numbers::pi * std::sqrt(det)), 1e-15);
  EXPECT_DOUBLE_EQ(gaussian_density(k, x), k.density(x));
}

TEST(GaussianKernel, SingularRejected) {
  Eigen::Matrix2d A;
  A << 1.0, 1.0, 1.0, 1.0;
  try {
    GaussianKernel k(A, Eigen::Vector2d::Zero());
    FAIL() << "singular A accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularKernel);
  }
  EXPECT_THROW(GaussianKernel(Eigen::MatrixXd::Constant(1, 1, std::nan("")), Eigen::VectorXd::Zero(1)), Error);
}

TEST(GaussianKernel, FromCoefficientsTrapezoid) {
  // a(u) = 2 + 2u, b(u) = u on [0, 2]: A = 8, B = 2, exact for linear integrands
  const std::vector<double> grid{0.0, 0.5, 1.25, 2.0};
  std::vector<Eigen::MatrixXd> a;
  std::vector<Eigen::VectorXd> b;
  for (double u : grid) {
    a.push_back(Eigen::MatrixXd::Constant(1, 1, 2.0 + 2.0 * u));
    b.push_back(Eigen::VectorXd::Constant(1, u));
  }
  const auto k = GaussianKernel::from_coefficients(grid, a, b);
  EXPECT_NEAR(k.A()(0, 0), 8.0, 1e-14);
  EXPECT_NEAR(k.B()(0), 2.0, 1e-14);
  EXPECT_NEAR(k.density(Eigen::VectorXd::Constant(1, 3.0)), normal_pdf(1.0, 8.0), 1e-15);
}

TEST(KernelV, ZeroSigmaIsHeatKernel) {
  const auto g = heis();
  const auto vk = kernel_V(zero_path(2, 1.5, 30), g.roots(), 1.5);
  EXPECT_NEAR(vk.kernel.A()(0, 0), 3.0, 1e-13);
  EXPECT_NEAR(vk.clocks.clocks.at(0).back(), 1.5, 1e-13);
  EXPECT_NEAR(vk.kernel.density(Eigen::VectorXd::Constant(1, 0.7)), normal_pdf(0.7, 3.0), 1e-14);
}

TEST(KernelV, RejectsTimeBeyondHorizon) {
  EXPECT_THROW(kernel_V(zero_path(2, 1.0, 10), heis().roots(), 2.0), Error);
  EXPECT_THROW(kernel_V(zero_path(2, 1.0, 10), heis().roots(), 0.0), Error);
}

TEST(KernelM, ZeroEtaZeroSigma) {
  const auto g = heis();
  const auto s = zero_path(2, 2.0, 20);
  const auto k = kernel_M_given_eta(g, s, zero_path(1, 2.0, 20), 2.0);
  EXPECT_LE((k.A() - 4.0 * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(KernelM, ConstantEtaShearsCovariance) {
  // Ad(c) maps (y, z) to (y, z + c y), so A = 2t [[1, c], [c, 1 + c^2]]
  const auto g = heis();
  const auto s = zero_path(2, 1.0, 10);
  const DiscretePath eta(uniform_grid(1.0, 10), Eigen::MatrixXd::Constant(1, 11, 0.5), 0);
  const auto k = kernel_M_given_eta(g, s, eta, 1.0);
  Eigen::Matrix2d expected;
  expected << 2.0, 1.0, 1.0, 2.5;
  EXPECT_LE((k.A() - expected).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_DOUBLE_EQ(lambda_sup(eta), 0.5);
}

TEST(SkewProduct, AbelianIsProductOfGaussians) {
  const auto g = heis(true);
  const auto sigma = sample_bm_drift(2, Eigen::Vector2d::Zero(), Eigen::Vector2d(-2, -2), 1.0, 100, 3);
  const auto fs = functional_set(sigma, g.roots(), 0.0, 1.0);
  const auto x = heisenberg_point(Eigen::VectorXd::Constant(1, 0.4), Eigen::VectorXd::Constant(1, -0.3), 0.2);
  const double expected = normal_pdf(-0.3, 2 * fs.m_root(0)) * normal_pdf(0.2, 2 * fs.m_root(1)) *
                          normal_pdf(0.4, 2 * fs.v_root(0));
  const auto e = estimate_P_sigma(g, sigma, x, 1.0, 8, 1);
  EXPECT_NEAR(e.mean, expected, 1e-10 * expected);
  EXPECT_LE(e.std_error, 1e-12 * expected);
}

TEST(SkewProduct, FibreIntegratesToVMarginal) {
  // K^M is a normalized Gaussian in m for every eta, so the m-integral of the
  // estimate over a fibre recovers the V kernel exactly up to quadrature
  const auto g = heis();
  const auto sigma = zero_path(2, 1.0, 50);
  const SkewProductEstimator est(g, sigma, 1.0);
  const Eigen::VectorXd v = Eigen::VectorXd::Constant(1, 0.8);
  std::vector<Eigen::VectorXd> ms;
  const double h = 0.1;
  for (int i = -120; i <= 120; ++i)
    for (int j = -120; j <= 120; ++j) ms.push_back(Eigen::Vector2d(i * h, j * h));
  const auto fibre = est.estimate_fiber(v, ms, 16, 5, 2);
  double mass = 0.0;
  for (const auto& e : fibre) mass += e.mean * h * h;
  EXPECT_NEAR(mass, normal_pdf(0.8, 2.0), 1e-6);
}

TEST(SkewProduct, SharedStreamsAcrossWorkers) {
  const auto g = heis();
  const auto sigma = sample_bm_drift(2, Eigen::Vector2d::Zero(), Eigen::Vector2d(-2, -2), 1.0, 100, 9);
  const auto x = heisenberg_point(Eigen::VectorXd::Constant(1, 0.1), Eigen::VectorXd::Constant(1, 0.2), -0.3);
  const auto a = estimate_P_sigma(g, sigma, x, 1.0, 64, 4, 1);
  const auto b = estimate_P_sigma(g, sigma, x, 1.0, 64, 4, 3);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.median_of_means, b.median_of_means);
  EXPECT_GT(a.mean, 0.0);
  EXPECT_THROW(estimate_P_sigma(g, sigma, x, 1.0, 1, 4), Error);
}

TEST(SkewProduct, BridgeEndsAtTarget) {
  const auto g = heis();
  const auto sigma = sample_bm_drift(2, Eigen::Vector2d::Zero(), Eigen::Vector2d(-2, -2), 1.0, 100, 10);
  const SkewProductEstimator est(g, sigma, 1.0);
  Rng rng(4);
  Eigen::MatrixXd eta;
  est.sample_eta(Eigen::VectorXd::Constant(1, 1.25), rng, eta);
  ASSERT_EQ(eta.cols(), static_cast<Eigen::Index>(est.nodes()));
  EXPECT_EQ(eta(0, 0), 0.0);
  EXPECT_NEAR(eta(0, eta.cols() - 1), 1.25, 1e-14);
}
