#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "liegroup.hpp"
#include "mcstats.hpp"

namespace nak {

struct PoissonArgs {
  double horizon = 8.0;
  std::size_t n_sigma = 256;
  std::size_t n_eta = 64;
  std::size_t steps_per_unit = 50;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

void validate(const PoissonArgs& args);

struct PoissonEstimate {
  GroupElement point;
  McEstimate value;       // at the full horizon
  McEstimate half_value;  // same sigma and eta streams, horizon / 2
  double diff_mean = 0.0;  // paired per-sigma difference full - half
  double diff_std_error = 0.0;
  double horizon = 0.0;
  std::size_t n_sigma = 0;
  std::size_t n_eta = 0;
  // |value - half_value| <= 3 sqrt(se^2 + se_half^2); the paired difference
  // is reported alongside as the sharper diagnostic
  bool converged = false;
};

// nu^a(x) ~ E P^sigma(0,T)(x^{-1}), sigma = b - 2 alpha u started at a. With
// an empty `start` the paths start at 0 and this estimates nu itself.
PoissonEstimate estimate_nu(const MetaAbelianGroup& g, const GroupElement& x,
                            const PoissonArgs& args, const Eigen::VectorXd& start = {});

struct RegressionResult {
  double slope = 0.0;
  double slope_std_error = 0.0;
  double intercept = 0.0;
};

// Weighted least squares of log(value) on log(1 + r) with weights
// (value / std_error)^2; unit weights when any std_error is 0.
RegressionResult fit_decay(std::span<const double> radii, std::span<const double> values,
                           std::span<const double> std_errors);

struct DecayFit {
  GroupElement direction;
  Eigen::VectorXd rho;
  std::vector<double> radii;
  std::vector<PoissonEstimate> estimates;
  std::vector<bool> included;    // converged points used in the fit
  std::vector<double> log_values;  // median-of-means
  RegressionResult fit;          // median-of-means values
  RegressionResult fit_mean;     // plain means, for comparison
};

// nu at dilate(rho, r, direction) for each radius; radius i uses master seed
// derive_seed(args.seed, i). Non-converged points are excluded from the fit.
DecayFit decay_regression(const MetaAbelianGroup& g, const GroupElement& direction,
                          const Eigen::VectorXd& rho, std::span<const double> radii,
                          const PoissonArgs& args);

// Direct route: nu at dilate(rho, e^{-s}, x0), s <= 0.
PoissonEstimate nu_srho(const MetaAbelianGroup& g, const GroupElement& x0, double s,
                        const Eigen::VectorXd& rho, const PoissonArgs& args);

// Scaling route: e^{rho_0(s rho)} nu^{s rho}(x0); value fields are rescaled.
PoissonEstimate nu_srho_scaled(const MetaAbelianGroup& g, const GroupElement& x0, double s,
                               const Eigen::VectorXd& rho, const PoissonArgs& args);

}  // namespace nak
