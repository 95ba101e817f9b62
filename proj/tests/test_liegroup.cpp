#include <gtest/gtest.h>

#include <cmath>

#include "bounds.hpp"
#include "error.hpp"
#include "liegroup.hpp"
#include "rng.hpp"

using namespace nak;

namespace {

MetaAbelianGroup h1(Eigen::Vector2d alpha = {1.0, 1.0}) {
  return heisenberg_instance(1, Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), alpha);
}

GroupElement random_element(const MetaAbelianGroup& g, Rng& rng) {
  GroupElement e{Eigen::VectorXd(g.m()), Eigen::VectorXd(g.n())};
  for (Eigen::Index i = 0; i < g.m(); ++i) e.m(i) = 4.0 * rng.uniform() - 2.0;
  for (Eigen::Index j = 0; j < g.n(); ++j) e.v(j) = 4.0 * rng.uniform() - 2.0;
  return e;
}

void expect_close(const GroupElement& a, const GroupElement& b, double tol) {
  EXPECT_LE((a.m - b.m).cwiseAbs().maxCoeff(), tol);
  EXPECT_LE((a.v - b.v).cwiseAbs().maxCoeff(), tol);
}

}  // namespace

TEST(Heisenberg, ProductMatchesCoordinateFormula) {
  // (x, y, z)(x', y', z') = (x + x', y + y', z + z' + x . y')
  const auto g = heisenberg_instance(2, Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), Eigen::Vector2d(1, 1));
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto a = random_element(g, rng), b = random_element(g, rng);
    const Eigen::Vector2d x = a.v, y = a.m.head(2), x2 = b.v, y2 = b.m.head(2);
    const auto p = g.multiply(a, b);
    const auto expected = heisenberg_point(x + x2, y + y2, a.m(2) + b.m(2) + x.dot(y2));
    expect_close(p, expected, 1e-14);
  }
}

TEST(Heisenberg, Structure) {
  const auto g = h1();
  EXPECT_EQ(g.m(), 2);
  EXPECT_EQ(g.n(), 1);
  EXPECT_EQ(g.k_o(), 1);
  EXPECT_EQ(g.roots().xi().row(0), Eigen::RowVector2d(0, 1));
  EXPECT_EQ(g.roots().xi().row(1), Eigen::RowVector2d(1, 1));
  EXPECT_EQ(g.roots().theta().row(0), Eigen::RowVector2d(1, 0));
  EXPECT_EQ(g.roots().lambda().rows(), 3);
  EXPECT_TRUE(g.roots().in_positive_chamber(g.roots().h0()));
}

TEST(GroupLaw, AssociativeWithInverses) {
  const auto g = heisenberg_instance(3, Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), Eigen::Vector2d(1, 1));
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const auto a = random_element(g, rng), b = random_element(g, rng), c = random_element(g, rng);
    expect_close(g.multiply(g.multiply(a, b), c), g.multiply(a, g.multiply(b, c)), 1e-12);
    expect_close(g.multiply(a, g.inverse(a)), g.identity(), 1e-14);
    expect_close(g.multiply(g.inverse(a), a), g.identity(), 1e-14);
  }
}

TEST(GroupLaw, DilationAndConjugationAreAutomorphisms) {
  const auto g = h1();
  const Eigen::Vector2d rho(1, 2), a(0.3, -0.7);
  Rng rng(3);
  for (int i = 0; i < 30; ++i) {
    const auto x = random_element(g, rng), y = random_element(g, rng);
    expect_close(g.dilate(rho, 1.7, g.multiply(x, y)), g.multiply(g.dilate(rho, 1.7, x), g.dilate(rho, 1.7, y)),
                 1e-12);
    expect_close(g.conjugate(a, g.multiply(x, y)), g.multiply(g.conjugate(a, x), g.conjugate(a, y)), 1e-12);
  }
}

TEST(GroupLaw, DilationScalesNorm) {
  const auto g = h1();
  const Eigen::Vector2d rho(1, 2);
  const auto x = heisenberg_point(Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Constant(1, -3.0), 2.0);
  const double r = g.homogeneous_norm(rho, x);
  // |y|^{1/2}, |z|^{1/3}, |x|^{1/1}
  EXPECT_NEAR(r, std::max({std::sqrt(3.0), std::cbrt(2.0), 0.5}), 1e-14);
  for (double t : {0.1, 2.0, 13.0}) EXPECT_NEAR(g.homogeneous_norm(rho, g.dilate(rho, t, x)), t * r, 1e-12 * t);
}

TEST(GroupLaw, DimensionMismatchRejected) {
  const auto g = h1();
  EXPECT_THROW(g.multiply({Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(1)}, g.identity()), Error);
}

TEST(KO, Values) {
  Eigen::MatrixXd n3 = Eigen::MatrixXd::Zero(3, 3);
  n3(1, 0) = 1.0;
  n3(2, 1) = 1.0;
  EXPECT_EQ(compute_k_o({n3}), 2);
  try {
    compute_k_o({Eigen::MatrixXd::Zero(2, 2)});
    FAIL() << "abelian accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateGroup);
  }
}

TEST(KO, AbelianOptIn) {
  MetaAbelianGroup::Options opts;
  opts.allow_abelian = true;
  const auto g = heisenberg_instance(1, Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), Eigen::Vector2d(1, 1),
                                     std::nullopt, opts);
  EXPECT_TRUE(g.is_abelian());
  const auto x = heisenberg_point(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1), 0.0);
  EXPECT_EQ(g.multiply(x, x).m(1), 0.0);
}

TEST(Roots, DivergentDriftNamesRoot) {
  const auto g = h1(Eigen::Vector2d(1, -2));
  try {
    g.roots().require_alpha_positive();
    FAIL() << "alpha outside A+ accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DivergentDrift);
    EXPECT_NE(std::string(e.what()).find("root"), std::string::npos);
  }
  EXPECT_NO_THROW(h1().roots().require_alpha_positive());
}

TEST(Roots, Functionals) {
  const auto g = h1();
  const auto& r = g.roots();
  const Eigen::Vector2d a(1, 2);
  EXPECT_DOUBLE_EQ(rho_zero(r, a), 2.0 + 3.0 + 1.0);
  EXPECT_NEAR(chi(r, a), std::exp(6.0), 1e-9);
  EXPECT_DOUBLE_EQ(gamma_min(r, RootSubset::Lambda, a), 1.0);
  EXPECT_DOUBLE_EQ(gamma_min(r, RootSubset::Xi, a), 2.0);
  EXPECT_DOUBLE_EQ(gamma_bar(r, RootSubset::Lambda, Eigen::Vector2d(2, 0.5)), 0.5);
  EXPECT_DOUBLE_EQ(gamma_bar(r, RootSubset::Theta, Eigen::Vector2d(2, 0.5)), 2.0);
  EXPECT_EQ(parse_root_subset("theta"), RootSubset::Theta);
  EXPECT_THROW(parse_root_subset("eta"), Error);
}

TEST(PhiK, Values) {
  EXPECT_DOUBLE_EQ(phi_k(Eigen::Vector2d(0, 0), 2), 0.0);
  EXPECT_DOUBLE_EQ(phi_k(Eigen::Vector2d(0.6, 0.8), 3), 0.125);
  EXPECT_NEAR(phi_k(Eigen::Vector2d(16, 0), 4), std::pow(2.0 / 3.0, 4), 1e-15);
  EXPECT_LT(phi_k(Eigen::Vector2d(1e12, 0), 2), 1.0);
}

TEST(Exponents, HeisenbergClosedForms) {
  const Eigen::Vector2d rho(1, 2);
  for (const Eigen::Vector2d& a : {Eigen::Vector2d(1, 1), Eigen::Vector2d(2, 0.5), Eigen::Vector2d(0.3, 1.7)}) {
    const auto g = h1(a);
    const auto& r = g.roots();
    const double mn = std::min({a(0), a(1), (a(0) + a(1)) / 2});
    EXPECT_DOUBLE_EQ(exponent_thcm(r, rho).gamma_alpha, 2.0 * mn);
    EXPECT_DOUBLE_EQ(exponent_thcm(r, rho).rho0_rho, 6.0);
    const double sq = std::min({a(0) * a(0), a(1) * a(1), (a(0) + a(1)) * (a(0) + a(1)) / 2});
    EXPECT_DOUBLE_EQ(exponent_thpota(r, 3.0), 2.0 * sq / 3.0);
    EXPECT_DOUBLE_EQ(exponent_newupper(r, rho, ExponentRegion::VLarge), a(0));
    EXPECT_DOUBLE_EQ(exponent_newupper(r, rho, ExponentRegion::MLarge), mn);
    EXPECT_DOUBLE_EQ(exponent_newupper(r, rho, ExponentRegion::Both), a(0) / 2 + mn / 2);
  }
  EXPECT_THROW(exponent_thpota(h1().roots(), 1.0), Error);
  EXPECT_THROW(exponent_newupper(h1(Eigen::Vector2d(1, -2)).roots(), rho, ExponentRegion::Both), Error);
}
