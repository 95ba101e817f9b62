#include "evolker.hpp"

#include <cmath>
#include <numbers>

#include "error.hpp"

namespace nak {

namespace {

std::vector<double> trapezoid_weights(const std::vector<double>& grid) {
  std::vector<double> w(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double h = 0.5 * (grid[i] - grid[i - 1]);
    w[i - 1] += h;
    w[i] += h;
  }
  return w;
}

DiscretePath restrict_to(const DiscretePath& p, double t) {
  require(t > 0.0, "evolution kernel: t must be positive");
  require(t <= p.horizon() * (1.0 + 1e-12), "evolution kernel: t beyond the path horizon");
  if (std::abs(t - p.horizon()) <= 1e-12 * p.horizon()) return p;
  return p.truncated(t);
}

Eigen::MatrixXd scale_matrix(const DiscretePath& sigma, const RootSystem& roots) {
  return (roots.xi() * sigma.values()).array().exp().matrix();
}

// sum_k 2 w_k [Ad(eta_k) S_k][Ad(eta_k) S_k]^T
Eigen::MatrixXd accumulate_m(const MetaAbelianGroup& g, const std::vector<double>& w,
                             const Eigen::MatrixXd& scale, const Eigen::MatrixXd& eta) {
  const Eigen::Index m = g.m();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd ad(m, m), scratch(m, m), prod(m, m);
  Eigen::VectorXd v(g.n());
  for (std::size_t k = 0; k < w.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    v = eta.col(kk);
    g.adjoint_on_m(v, ad, scratch);
    prod.noalias() = ad * scale.col(kk).asDiagonal();
    A.noalias() += (2.0 * w[k]) * prod * prod.transpose();
  }
  return A;
}

}  // namespace

GaussianKernel::GaussianKernel(Eigen::MatrixXd A, Eigen::VectorXd B)
    : A_(std::move(A)), B_(std::move(B)) {
  require(A_.rows() >= 1 && A_.rows() == A_.cols(), "GaussianKernel: A must be square");
  require(B_.size() == A_.rows(), "GaussianKernel: B has wrong dimension");
  if (!A_.allFinite() || !B_.allFinite())
    fail(ErrorCode::SingularKernel, "GaussianKernel: non-finite coefficients");
  const double scale = A_.cwiseAbs().maxCoeff();
  require((A_ - A_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(scale, 1e-300),
          "GaussianKernel: A must be symmetric");
  llt_.compute(A_);
  if (llt_.info() != Eigen::Success || scale == 0.0)
    fail(ErrorCode::SingularKernel, "GaussianKernel: A is not positive definite");
  const Eigen::VectorXd diag = llt_.matrixLLT().diagonal();
  if (!(diag.array() > 0.0).all())
    fail(ErrorCode::SingularKernel, "GaussianKernel: A is not positive definite");
  log_det_ = 2.0 * diag.array().log().sum();
}

GaussianKernel GaussianKernel::from_coefficients(std::span<const double> grid,
                                                 std::span<const Eigen::MatrixXd> a,
                                                 std::span<const Eigen::VectorXd> b) {
  require(grid.size() >= 2, "GaussianKernel: need at least two nodes");
  require(a.size() == grid.size() && b.size() == grid.size(),
          "GaussianKernel: one coefficient per node");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(a[0].rows(), a[0].cols());
  Eigen::VectorXd B = Eigen::VectorXd::Zero(b[0].size());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double h = 0.5 * (grid[i] - grid[i - 1]);
    require(h > 0.0, "GaussianKernel: grid must be strictly increasing");
    A += h * (a[i - 1] + a[i]);
    B += h * (b[i - 1] + b[i]);
  }
  return GaussianKernel(0.5 * (A + A.transpose()), std::move(B));
}

double GaussianKernel::log_density(const Eigen::VectorXd& x) const {
  require(x.size() == dim(), "GaussianKernel: point has wrong dimension");
  const Eigen::VectorXd y = llt_.matrixL().solve(x - B_);
  return -0.5 * y.squaredNorm() - 0.5 * log_det_ -
         0.5 * static_cast<double>(dim()) * std::log(2.0 * std::numbers::pi);
}

double gaussian_density(const GaussianKernel& k, const Eigen::VectorXd& x) {
  return k.density(x);
}

void validate(const ClockSet& c) {
  for (const auto& cl : c.clocks) {
    require(cl.size() == c.grid.size(), "ClockSet: clock/grid length mismatch");
    require(!cl.empty() && cl.front() == 0.0, "ClockSet: clocks start at 0");
    for (std::size_t i = 1; i < cl.size(); ++i)
      require(cl[i] >= cl[i - 1], "ClockSet: clocks must be nondecreasing");
  }
}

VKernel kernel_V(const DiscretePath& sigma, const RootSystem& roots, double t) {
  require(sigma.dim() == roots.rank(), "kernel_V: path dimension must equal the rank");
  const DiscretePath p = restrict_to(sigma, t);
  ClockSet clocks{p.grid(), {}};
  Eigen::VectorXd diag(roots.n());
  for (Eigen::Index j = 0; j < roots.n(); ++j) {
    clocks.clocks.push_back(cumulative_exponential(p, roots.theta().row(j).transpose(), 2.0));
    diag(j) = 2.0 * clocks.clocks.back().back();
    if (!(diag(j) > 0.0))
      fail(ErrorCode::SingularKernel, "kernel_V: clock " + std::to_string(j) + " is degenerate");
  }
  return {GaussianKernel(diag.asDiagonal().toDenseMatrix(), Eigen::VectorXd::Zero(roots.n())),
          std::move(clocks)};
}

GaussianKernel kernel_M_given_eta(const MetaAbelianGroup& g, const DiscretePath& sigma,
                                  const DiscretePath& eta, double t) {
  require(sigma.dim() == g.roots().rank(), "kernel_M_given_eta: sigma has wrong dimension");
  require(eta.dim() == g.n(), "kernel_M_given_eta: eta has wrong dimension");
  require(sigma.size() == eta.size(), "kernel_M_given_eta: sigma and eta must share the grid");
  for (std::size_t i = 0; i < sigma.size(); ++i)
    require(std::abs(sigma.grid()[i] - eta.grid()[i]) <= 1e-12 * std::max(1.0, sigma.horizon()),
            "kernel_M_given_eta: sigma and eta must share the grid");
  const DiscretePath s = restrict_to(sigma, t);
  const DiscretePath e = restrict_to(eta, t);
  const Eigen::MatrixXd A =
      accumulate_m(g, trapezoid_weights(s.grid()), scale_matrix(s, g.roots()), e.values());
  return GaussianKernel(0.5 * (A + A.transpose()), Eigen::VectorXd::Zero(g.m()));
}

double lambda_sup(const DiscretePath& eta) {
  return eta.values().colwise().norm().maxCoeff();
}

SkewProductEstimator::SkewProductEstimator(const MetaAbelianGroup& g, const DiscretePath& sigma,
                                           double t)
    : g_(&g),
      funcs_(functional_set(restrict_to(sigma, t), g.roots(), 0.0, t)),
      v_(kernel_V(sigma, g.roots(), t)) {
  const DiscretePath p = restrict_to(sigma, t);
  grid_ = p.grid();
  weights_ = trapezoid_weights(grid_);
  scale_ = scale_matrix(p, g.roots());
}

void SkewProductEstimator::sample_eta(const Eigen::VectorXd& v, Rng& rng,
                                      Eigen::MatrixXd& eta) const {
  require(v.size() == g_->n(), "sample_eta: v has wrong dimension");
  const auto L = static_cast<Eigen::Index>(grid_.size());
  eta.resize(g_->n(), L);
  std::vector<double> row(grid_.size() - 1);
  for (Eigen::Index j = 0; j < g_->n(); ++j) {
    const auto& c = v_.clocks.clocks[static_cast<std::size_t>(j)];
    sample_bridge_into(0.0, v(j), c.back(), std::span<const double>(c).subspan(1), rng, row);
    eta(j, 0) = 0.0;
    for (Eigen::Index k = 1; k < L; ++k) eta(j, k) = row[static_cast<std::size_t>(k - 1)];
  }
}

Eigen::MatrixXd SkewProductEstimator::m_covariance(const Eigen::MatrixXd& eta) const {
  require(eta.rows() == g_->n() && eta.cols() == static_cast<Eigen::Index>(grid_.size()),
          "m_covariance: eta has wrong shape");
  const Eigen::MatrixXd A = accumulate_m(*g_, weights_, scale_, eta);
  return 0.5 * (A + A.transpose());
}

Eigen::MatrixXd SkewProductEstimator::log_m_density(const Eigen::VectorXd& v,
                                                    std::span<const Eigen::VectorXd> ms,
                                                    std::size_t n_eta, std::uint64_t seed,
                                                    unsigned workers) const {
  require(n_eta >= 2, "skew-product estimator: n_eta must be at least 2");
  for (const auto& m : ms) require(m.size() == g_->m(), "skew-product estimator: m has wrong dimension");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n_eta), static_cast<Eigen::Index>(ms.size()));
  parallel_for(n_eta, workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    Eigen::MatrixXd eta;
    sample_eta(v, rng, eta);
    const GaussianKernel k(m_covariance(eta), Eigen::VectorXd::Zero(g_->m()));
    for (std::size_t c = 0; c < ms.size(); ++c)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = k.log_density(ms[c]);
  });
  return out;
}

std::vector<McEstimate> SkewProductEstimator::estimate_fiber(const Eigen::VectorXd& v,
                                                             std::span<const Eigen::VectorXd> ms,
                                                             std::size_t n_eta,
                                                             std::uint64_t seed,
                                                             unsigned workers) const {
  const double log_v = v_.kernel.log_density(v);
  const Eigen::MatrixXd logk = log_m_density(v, ms, n_eta, seed, workers);
  std::vector<McEstimate> out;
  out.reserve(ms.size());
  std::vector<double> vals(n_eta);
  for (Eigen::Index c = 0; c < logk.cols(); ++c) {
    for (Eigen::Index i = 0; i < logk.rows(); ++i)
      vals[static_cast<std::size_t>(i)] = std::exp(logk(i, c) + log_v);
    out.push_back(summarize(vals, seed, "skew-product"));
  }
  return out;
}

McEstimate SkewProductEstimator::estimate(const GroupElement& target, std::size_t n_eta,
                                          std::uint64_t seed, unsigned workers) const {
  g_->check_element(target);
  const std::vector<Eigen::VectorXd> ms{target.m};
  return estimate_fiber(target.v, ms, n_eta, seed, workers).front();
}

McEstimate estimate_P_sigma(const MetaAbelianGroup& g, const DiscretePath& sigma,
                            const GroupElement& target, double t, std::size_t n_eta,
                            std::uint64_t seed, unsigned workers) {
  return SkewProductEstimator(g, sigma, t).estimate(target, n_eta, seed, workers);
}

}  // namespace nak
