#include "mcstats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

#include "error.hpp"

namespace nak {

namespace {

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  const double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + n / 2);
  return 0.5 * (lo + hi);
}

std::vector<double> block_means(std::span<const double> values,
                                std::size_t n_blocks) {
  const std::size_t n = values.size();
  n_blocks = std::clamp<std::size_t>(n_blocks, 1, n);
  std::vector<double> means;
  means.reserve(n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const std::size_t lo = b * n / n_blocks;
    const std::size_t hi = (b + 1) * n / n_blocks;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += values[i];
    means.push_back(s / static_cast<double>(hi - lo));
  }
  return means;
}

}  // namespace

double median_of_means(std::span<const double> values, std::size_t n_blocks) {
  require(!values.empty(), "median_of_means: no values");
  return median(block_means(values, n_blocks));
}

McEstimate summarize(std::span<const double> values, std::uint64_t seed,
                     std::string variant, std::size_t n_blocks) {
  require(!values.empty(), "summarize: no values");
  McEstimate est;
  est.count = values.size();
  est.seed = seed;
  est.variant = std::move(variant);

  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  est.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    est.std_error = std::sqrt(ss / (n - 1.0) / n);
  }

  const auto means = block_means(values, n_blocks);
  est.median_of_means = median(means);
  if (means.size() > 1) {
    const double b = static_cast<double>(means.size());
    double m = 0.0;
    for (double x : means) m += x;
    m /= b;
    double ss = 0.0;
    for (double x : means) ss += (x - m) * (x - m);
    est.mom_std_error =
        std::sqrt(std::numbers::pi / 2.0) * std::sqrt(ss / (b - 1.0) / b);
  } else {
    est.mom_std_error = est.std_error;
  }
  return est;
}

double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf) {
  require(!samples.empty(), "ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, f - static_cast<double>(i) / n,
                  static_cast<double>(i + 1) / n - f});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t w = std::min<std::size_t>(workers, n);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(w);
  pool.reserve(w);
  for (std::size_t k = 0; k < w; ++k) {
    pool.emplace_back([&, k] {
      try {
        for (std::size_t i = k * n / w; i < (k + 1) * n / w; ++i) body(i);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

unsigned default_workers() {
  if (const char* env = std::getenv("NAKERNEL_WORKERS")) {
    const long w = std::strtol(env, nullptr, 10);
    if (w >= 1) return static_cast<unsigned>(w);
  }
  return 1;
}

}  // namespace nak
