#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "liegroup.hpp"
#include "randpath.hpp"

namespace nak {

// Trapezoidal integral of u -> exp(d * form(path(u))) over [s, t]. Endpoints
// off the grid are interpolated.
double integrate_exponential(const DiscretePath& path, const Eigen::VectorXd& form, double d,
                             double s, double t);

// Logarithm of the same integral, accumulated without overflow.
double log_integrate_exponential(const DiscretePath& path, const Eigen::VectorXd& form,
                                 double d, double s, double t);

// Running trapezoidal integral from 0 to every grid node; first entry is 0.
std::vector<double> cumulative_exponential(const DiscretePath& path, const Eigen::VectorXd& form,
                                           double d);

// A_{M,i}(s,t) = int e^{2 xi_i(sigma)}, A_{V,j}(s,t) = int e^{2 theta_j(sigma)}
// and their sums and products. Stored as logarithms.
class ExpFunctionalSet {
 public:
  ExpFunctionalSet(Eigen::VectorXd log_m, Eigen::VectorXd log_v);

  Eigen::Index m() const noexcept { return log_m_.size(); }
  Eigen::Index n() const noexcept { return log_v_.size(); }

  double m_root(Eigen::Index i) const { return std::exp(log_m_(i)); }
  double v_root(Eigen::Index j) const { return std::exp(log_v_(j)); }
  const Eigen::VectorXd& log_m_roots() const noexcept { return log_m_; }
  const Eigen::VectorXd& log_v_roots() const noexcept { return log_v_; }

  double m_sigma() const noexcept { return m_sigma_; }
  double v_sigma() const noexcept { return v_sigma_; }
  double n_sigma() const noexcept { return m_sigma_ + v_sigma_; }

  double log_m_pi() const noexcept { return log_m_pi_; }
  double log_v_pi() const noexcept { return log_v_pi_; }
  double log_n_pi() const noexcept { return log_m_pi_ + log_v_pi_; }
  double m_pi() const { return std::exp(log_m_pi_); }
  double v_pi() const { return std::exp(log_v_pi_); }
  double n_pi() const { return std::exp(log_n_pi()); }

 private:
  Eigen::VectorXd log_m_;
  Eigen::VectorXd log_v_;
  double m_sigma_ = 0.0;
  double v_sigma_ = 0.0;
  double log_m_pi_ = 0.0;
  double log_v_pi_ = 0.0;
};

ExpFunctionalSet functional_set(const DiscretePath& sigma, const RootSystem& roots, double s,
                                double t);

// h(x) = gamma^mu / Gamma(mu) * x^{-mu-1} e^{-gamma/x} on x > 0.
struct InverseGammaLaw {
  double shape = 1.0;  // mu
  double scale = 1.0;  // gamma
};

void validate(const InverseGammaLaw& law);
double inverse_gamma_density(const InverseGammaLaw& law, double x);
double inverse_gamma_log_density(const InverseGammaLaw& law, double x);
double inverse_gamma_cdf(const InverseGammaLaw& law, double x);

// Law of int_0^inf e^{d l(sigma_u)} du, sigma_u = b_u - 2 alpha u:
// shape 2 l(alpha) / (d |l|^2), scale 1 / (d^2 |l|^2).
InverseGammaLaw perpetuity_law(double d, const Eigen::VectorXd& form,
                               const Eigen::VectorXd& alpha);

struct PerpetuityOptions {
  int steps_per_unit = 200;
  double tol = 1e-4;
  double safety = 10.0;
  double min_horizon = 1.0;
  double max_horizon = 1e5;
};

// One truncated sample of the perpetuity. The horizon grows one time unit at a
// time until safety * e^{d l(sigma_T)} / (d l(2 alpha)) < tol * (integral so far).
double sample_perpetuity(double d, const Eigen::VectorXd& form, const Eigen::VectorXd& alpha,
                         const PerpetuityOptions& opts, std::uint64_t seed);

// Sample i uses stream derive_seed(seed, i).
std::vector<double> sample_perpetuities(std::size_t count, double d,
                                        const Eigen::VectorXd& form,
                                        const Eigen::VectorXd& alpha,
                                        const PerpetuityOptions& opts, std::uint64_t seed,
                                        unsigned workers = 1);

}  // namespace nak
