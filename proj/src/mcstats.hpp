#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace nak {

inline constexpr std::size_t kMedianOfMeansBlocks = 16;

// Universal return type of the Monte Carlo operations.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // standard error of `mean`
  double median_of_means = 0.0;
  double mom_std_error = 0.0;  // sqrt(pi/2) * sd(block means) / sqrt(blocks)
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::string variant;  // which estimator produced the values
};

// Mean, standard error and median-of-means (contiguous blocks in index order,
// so the result does not depend on how the values were produced).
McEstimate summarize(std::span<const double> values, std::uint64_t seed,
                     std::string variant,
                     std::size_t n_blocks = kMedianOfMeansBlocks);

double median_of_means(std::span<const double> values, std::size_t n_blocks);

// Kolmogorov-Smirnov distance between the empirical law of `samples` and `cdf`.
double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf);

// Two-sample KS distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Runs body(i) for i in [0, n) on `workers` threads with a static partition.
// Bodies must only write to slots owned by their index.
void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t)>& body);

// Worker count from NAKERNEL_WORKERS, else 1.
unsigned default_workers();

}  // namespace nak
