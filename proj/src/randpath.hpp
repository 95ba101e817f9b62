#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "rng.hpp"

namespace nak {

// Brownian motion here always has per-coordinate variance 2*dt over a step of
// length dt (generator = Laplacian, not half of it).
inline constexpr double kVariancePerTime = 2.0;

// A sampled path on a time grid starting at 0. Column i of `values` is the
// position at grid[i].
class DiscretePath {
 public:
  DiscretePath(std::vector<double> grid, Eigen::MatrixXd values,
               std::uint64_t seed);

  const std::vector<double>& grid() const noexcept { return grid_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  std::uint64_t seed() const noexcept { return seed_; }
  Eigen::Index dim() const noexcept { return values_.rows(); }
  std::size_t size() const noexcept { return grid_.size(); }
  double horizon() const noexcept { return grid_.back(); }

  Eigen::VectorXd at(std::size_t i) const { return values_.col(static_cast<Eigen::Index>(i)); }

  // Piecewise-linear value at time u in [0, horizon].
  Eigen::VectorXd value_at(double u) const;

  // Restriction to [0, t]; t is appended as a node (by interpolation) when it
  // is not already one.
  DiscretePath truncated(double t) const;

  // Restriction to [s, t] re-based so the returned grid starts at 0.
  DiscretePath window(double s, double t) const;

  // Same grid, values shifted by a constant vector.
  DiscretePath shifted(const Eigen::VectorXd& offset) const;

 private:
  std::vector<double> grid_;
  Eigen::MatrixXd values_;
  std::uint64_t seed_;
};

std::vector<double> uniform_grid(double horizon, std::size_t n_steps);

// b_t + drift*t started at `start`, Var(b_t) = 2t per coordinate.
DiscretePath sample_bm_drift(Eigen::Index dim, const Eigen::VectorXd& start,
                             const Eigen::VectorXd& drift, double horizon,
                             std::size_t n_steps, std::uint64_t seed);

DiscretePath sample_bm_drift_on_grid(std::vector<double> grid,
                                     const Eigen::VectorXd& start,
                                     const Eigen::VectorXd& drift,
                                     std::uint64_t seed);

// Opt-in refinement: bisects every step whose largest coordinate increment
// exceeds `max_increment`, filling midpoints from the Brownian bridge law
// (the drift does not change the bridge). Stops after `max_depth` passes.
DiscretePath refine_path(const DiscretePath& path, double max_increment,
                         std::uint64_t seed, int max_depth = 12);

// Brownian bridge under a changed clock: a variance-2 Brownian motion run on
// the clock [0, clock_total], started at `start` and pinned to `end`.
struct BridgeSpec {
  double start = 0.0;
  double end = 0.0;
  double clock_total = 1.0;
  std::vector<double> clock_grid;
};

void validate(const BridgeSpec& spec);

// Values at spec.clock_grid by sequential Gaussian conditioning.
std::vector<double> sample_bridge(const BridgeSpec& spec, std::uint64_t seed);

// Allocation-free variant used inside estimator loops. `clock_grid` must be
// strictly increasing within [0, clock_total]; `out` receives one value per
// clock node. Does not validate.
void sample_bridge_into(double start, double end, double clock_total,
                        std::span<const double> clock_grid, Rng& rng,
                        std::span<double> out);

// CDF of the centred Gaussian with variance 2.
double phi_cdf(double x) noexcept;

}  // namespace nak
