#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "expfun.hpp"
#include "liegroup.hpp"
#include "mcstats.hpp"
#include "randpath.hpp"

namespace nak {

// Density (2 pi)^{-d/2} det(A)^{-1/2} exp(-(x - B)^T A^{-1} (x - B) / 2), where
// A = int a(u) du and B = int b(u) du accumulate the coefficients of the
// generator sum a_ij d_i d_j / 2 + sum b_j d_j.
class GaussianKernel {
 public:
  GaussianKernel(Eigen::MatrixXd A, Eigen::VectorXd B);

  // Trapezoidal A and B from coefficient samples at the grid nodes.
  static GaussianKernel from_coefficients(std::span<const double> grid,
                                          std::span<const Eigen::MatrixXd> a,
                                          std::span<const Eigen::VectorXd> b);

  Eigen::Index dim() const noexcept { return A_.rows(); }
  const Eigen::MatrixXd& A() const noexcept { return A_; }
  const Eigen::VectorXd& B() const noexcept { return B_; }
  double log_det_A() const noexcept { return log_det_; }

  double log_density(const Eigen::VectorXd& x) const;
  double density(const Eigen::VectorXd& x) const { return std::exp(log_density(x)); }

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd B_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double log_det_ = 0.0;
};

double gaussian_density(const GaussianKernel& k, const Eigen::VectorXd& x);

// c_j(u) = int_0^u e^{2 theta_j(sigma)} at every node of the sigma grid.
struct ClockSet {
  std::vector<double> grid;
  std::vector<std::vector<double>> clocks;
};

void validate(const ClockSet& c);

struct VKernel {
  GaussianKernel kernel;  // A = 2 diag(A_{V,j}(0,t)), B = 0
  ClockSet clocks;
};

VKernel kernel_V(const DiscretePath& sigma, const RootSystem& roots, double t);

// A = int_0^t 2 [Ad(eta) S][Ad(eta) S]^T du with S = diag(e^{xi_i(sigma)}),
// B = 0. sigma and eta must share the grid.
GaussianKernel kernel_M_given_eta(const MetaAbelianGroup& g, const DiscretePath& sigma,
                                  const DiscretePath& eta, double t);

// sup_u |eta(u)| over the grid.
double lambda_sup(const DiscretePath& eta);

// Pointwise estimator of P^sigma(0,t)(m, v): V-coordinates are bridges in the
// changed clocks pinned at v; the M-part is Gaussian given the bridge. The
// sigma-dependent pieces are computed once, so many targets can share them.
class SkewProductEstimator {
 public:
  SkewProductEstimator(const MetaAbelianGroup& g, const DiscretePath& sigma, double t);

  const MetaAbelianGroup& group() const noexcept { return *g_; }
  const VKernel& v_kernel() const noexcept { return v_; }
  const ExpFunctionalSet& functionals() const noexcept { return funcs_; }
  std::size_t nodes() const noexcept { return grid_.size(); }

  // n x nodes matrix of one eta bridge ending at v.
  void sample_eta(const Eigen::VectorXd& v, Rng& rng, Eigen::MatrixXd& eta) const;
  Eigen::MatrixXd m_covariance(const Eigen::MatrixXd& eta) const;

  // Log K^M(0, m) for each m, one row per eta sample: rows x ms.size().
  Eigen::MatrixXd log_m_density(const Eigen::VectorXd& v, std::span<const Eigen::VectorXd> ms,
                                std::size_t n_eta, std::uint64_t seed, unsigned workers) const;

  // One estimate per m on the fibre over v; all share the same eta samples
  // (sample i uses stream derive_seed(seed, i)).
  std::vector<McEstimate> estimate_fiber(const Eigen::VectorXd& v,
                                         std::span<const Eigen::VectorXd> ms, std::size_t n_eta,
                                         std::uint64_t seed, unsigned workers = 1) const;

  McEstimate estimate(const GroupElement& target, std::size_t n_eta, std::uint64_t seed,
                      unsigned workers = 1) const;

 private:
  const MetaAbelianGroup* g_;
  std::vector<double> grid_;
  std::vector<double> weights_;  // trapezoid weights on grid_
  Eigen::MatrixXd scale_;        // e^{xi_i(sigma)} at every node, m x nodes
  ExpFunctionalSet funcs_;
  VKernel v_;
};

McEstimate estimate_P_sigma(const MetaAbelianGroup& g, const DiscretePath& sigma,
                            const GroupElement& target, double t, std::size_t n_eta,
                            std::uint64_t seed, unsigned workers = 1);

}  // namespace nak
