#include "randpath.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"

namespace nak {

DiscretePath::DiscretePath(std::vector<double> grid, Eigen::MatrixXd values,
                           std::uint64_t seed)
    : grid_(std::move(grid)), values_(std::move(values)), seed_(seed) {
  require(!grid_.empty(), "DiscretePath: empty grid");
  require(grid_.front() == 0.0, "DiscretePath: grid must start at 0");
  for (std::size_t i = 1; i < grid_.size(); ++i)
    require(grid_[i] > grid_[i - 1], "DiscretePath: grid must be strictly increasing");
  require(values_.cols() == static_cast<Eigen::Index>(grid_.size()),
          "DiscretePath: values/grid length mismatch");
  require(values_.rows() >= 1, "DiscretePath: dimension must be positive");
}

Eigen::VectorXd DiscretePath::value_at(double u) const {
  require(u >= 0.0 && u <= grid_.back() * (1.0 + 1e-12),
          "DiscretePath::value_at: time outside grid");
  auto it = std::upper_bound(grid_.begin(), grid_.end(), u);
  if (it == grid_.end()) return values_.col(values_.cols() - 1);
  const auto hi = static_cast<Eigen::Index>(it - grid_.begin());
  const auto lo = hi - 1;
  const double w = (u - grid_[lo]) / (grid_[hi] - grid_[lo]);
  return (1.0 - w) * values_.col(lo) + w * values_.col(hi);
}

DiscretePath DiscretePath::truncated(double t) const {
  return window(0.0, t);
}

DiscretePath DiscretePath::window(double s, double t) const {
  require(s >= 0.0 && t > s, "DiscretePath::window: need 0 <= s < t");
  require(t <= grid_.back() * (1.0 + 1e-12), "DiscretePath::window: t beyond horizon");
  const double tol = 1e-12 * std::max(1.0, grid_.back());
  std::vector<double> g{0.0};
  std::vector<Eigen::VectorXd> cols{value_at(s)};
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (grid_[i] > s + tol && grid_[i] < t - tol) {
      g.push_back(grid_[i] - s);
      cols.push_back(values_.col(static_cast<Eigen::Index>(i)));
    }
  }
  g.push_back(t - s);
  cols.push_back(value_at(std::min(t, grid_.back())));
  Eigen::MatrixXd v(values_.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) v.col(static_cast<Eigen::Index>(i)) = cols[i];
  return DiscretePath(std::move(g), std::move(v), seed_);
}

DiscretePath DiscretePath::shifted(const Eigen::VectorXd& offset) const {
  require(offset.size() == dim(), "DiscretePath::shifted: dimension mismatch");
  Eigen::MatrixXd v = values_.colwise() + offset;
  return DiscretePath(grid_, std::move(v), seed_);
}

std::vector<double> uniform_grid(double horizon, std::size_t n_steps) {
  require(horizon > 0.0, "uniform_grid: horizon must be positive");
  require(n_steps >= 1, "uniform_grid: n_steps must be >= 1");
  std::vector<double> g(n_steps + 1);
  for (std::size_t i = 0; i <= n_steps; ++i)
    g[i] = horizon * static_cast<double>(i) / static_cast<double>(n_steps);
  g.back() = horizon;
  return g;
}

DiscretePath sample_bm_drift(Eigen::Index dim, const Eigen::VectorXd& start,
                             const Eigen::VectorXd& drift, double horizon,
                             std::size_t n_steps, std::uint64_t seed) {
  require(horizon > 0.0, "sample_bm_drift: horizon must be positive");
  require(n_steps >= 1, "sample_bm_drift: n_steps must be >= 1");
  require(dim >= 1 && start.size() == dim && drift.size() == dim,
          "sample_bm_drift: dimension mismatch");
  return sample_bm_drift_on_grid(uniform_grid(horizon, n_steps), start, drift, seed);
}

DiscretePath sample_bm_drift_on_grid(std::vector<double> grid,
                                     const Eigen::VectorXd& start,
                                     const Eigen::VectorXd& drift,
                                     std::uint64_t seed) {
  require(grid.size() >= 2, "sample_bm_drift_on_grid: need at least one step");
  require(start.size() == drift.size() && start.size() >= 1,
          "sample_bm_drift_on_grid: dimension mismatch");
  const Eigen::Index d = start.size();
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd v(d, n);
  v.col(0) = start;
  Rng rng(seed);
  for (Eigen::Index i = 1; i < n; ++i) {
    const double dt = grid[i] - grid[i - 1];
    require(dt > 0.0, "sample_bm_drift_on_grid: grid must be strictly increasing");
    const double sd = std::sqrt(kVariancePerTime * dt);
    for (Eigen::Index c = 0; c < d; ++c)
      v(c, i) = v(c, i - 1) + drift(c) * dt + sd * rng.normal();
  }
  return DiscretePath(std::move(grid), std::move(v), seed);
}

DiscretePath refine_path(const DiscretePath& path, double max_increment,
                         std::uint64_t seed, int max_depth) {
  require(max_increment > 0.0, "refine_path: max_increment must be positive");
  std::vector<double> grid = path.grid();
  std::vector<Eigen::VectorXd> cols;
  for (std::size_t i = 0; i < path.size(); ++i) cols.push_back(path.at(i));
  Rng rng(derive_seed(seed, 0x5EF1));
  for (int depth = 0; depth < max_depth; ++depth) {
    std::vector<double> g{grid.front()};
    std::vector<Eigen::VectorXd> c{cols.front()};
    bool changed = false;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if ((cols[i] - cols[i - 1]).cwiseAbs().maxCoeff() > max_increment) {
        const double dt = grid[i] - grid[i - 1];
        // midpoint of a variance-2 bridge over dt: mean = average, var = dt/2
        Eigen::VectorXd mid = 0.5 * (cols[i] + cols[i - 1]);
        const double sd = std::sqrt(kVariancePerTime * dt / 4.0);
        for (Eigen::Index k = 0; k < mid.size(); ++k) mid(k) += sd * rng.normal();
        g.push_back(grid[i - 1] + 0.5 * dt);
        c.push_back(std::move(mid));
        changed = true;
      }
      g.push_back(grid[i]);
      c.push_back(cols[i]);
    }
    grid = std::move(g);
    cols = std::move(c);
    if (!changed) break;
  }
  Eigen::MatrixXd v(path.dim(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) v.col(static_cast<Eigen::Index>(i)) = cols[i];
  return DiscretePath(std::move(grid), std::move(v), path.seed());
}

void validate(const BridgeSpec& spec) {
  require(spec.clock_total > 0.0, "BridgeSpec: clock_total must be positive");
  double prev = -1.0;
  for (double c : spec.clock_grid) {
    require(c > prev, "BridgeSpec: clock_grid must be strictly increasing");
    require(c >= 0.0 && c <= spec.clock_total,
            "BridgeSpec: clock_grid must lie in [0, clock_total]");
    prev = c;
  }
}

std::vector<double> sample_bridge(const BridgeSpec& spec, std::uint64_t seed) {
  validate(spec);
  std::vector<double> out(spec.clock_grid.size());
  Rng rng(seed);
  sample_bridge_into(spec.start, spec.end, spec.clock_total, spec.clock_grid, rng, out);
  return out;
}

void sample_bridge_into(double start, double end, double clock_total,
                        std::span<const double> clock_grid, Rng& rng,
                        std::span<double> out) {
  double c_prev = 0.0;
  double x_prev = start;
  for (std::size_t i = 0; i < clock_grid.size(); ++i) {
    const double c = clock_grid[i];
    const double remaining = clock_total - c_prev;
    if (c >= clock_total || remaining <= 0.0) {
      out[i] = end;
    } else {
      const double step = c - c_prev;
      const double mean = x_prev + (end - x_prev) * step / remaining;
      const double var = kVariancePerTime * step * (clock_total - c) / remaining;
      out[i] = var > 0.0 ? mean + std::sqrt(var) * rng.normal() : mean;
    }
    c_prev = c;
    x_prev = out[i];
  }
}

double phi_cdf(double x) noexcept {
  // Phi(x) = Phi_std(x / sqrt 2) = erfc(-x / 2) / 2
  return 0.5 * std::erfc(-0.5 * x);
}

}  // namespace nak
