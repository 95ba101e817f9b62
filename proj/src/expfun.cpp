#include "expfun.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "mcstats.hpp"

namespace nak {

namespace {

// Nodes of [s, t] on the path grid with interpolated endpoints, as (time, exponent).
void exponent_nodes(const DiscretePath& path, const Eigen::VectorXd& form, double d, double s,
                    double t, std::vector<double>& times, std::vector<double>& expo) {
  require(d > 0.0, "integrate_exponential: d must be positive");
  require(form.size() == path.dim(), "integrate_exponential: form/path dimension mismatch");
  require(s >= 0.0 && t > s && t <= path.horizon() * (1.0 + 1e-12),
          "integrate_exponential: [s, t] outside the path grid");
  const auto& g = path.grid();
  const double tol = 1e-12 * std::max(1.0, path.horizon());
  times.clear();
  expo.clear();
  times.push_back(s);
  expo.push_back(d * form.dot(path.value_at(s)));
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] > s + tol && g[i] < t - tol) {
      times.push_back(g[i]);
      expo.push_back(d * form.dot(path.values().col(static_cast<Eigen::Index>(i))));
    }
  }
  times.push_back(t);
  expo.push_back(d * form.dot(path.value_at(std::min(t, path.horizon()))));
}

}  // namespace

double integrate_exponential(const DiscretePath& path, const Eigen::VectorXd& form, double d,
                             double s, double t) {
  return std::exp(log_integrate_exponential(path, form, d, s, t));
}

double log_integrate_exponential(const DiscretePath& path, const Eigen::VectorXd& form,
                                 double d, double s, double t) {
  std::vector<double> times, expo;
  exponent_nodes(path, form, d, s, t, times, expo);
  const double top = *std::max_element(expo.begin(), expo.end());
  double acc = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i)
    acc += 0.5 * (times[i] - times[i - 1]) *
           (std::exp(expo[i - 1] - top) + std::exp(expo[i] - top));
  return top + std::log(acc);
}

std::vector<double> cumulative_exponential(const DiscretePath& path, const Eigen::VectorXd& form,
                                           double d) {
  require(d > 0.0, "cumulative_exponential: d must be positive");
  require(form.size() == path.dim(), "cumulative_exponential: form/path dimension mismatch");
  const auto& g = path.grid();
  const Eigen::VectorXd e = (d * (form.transpose() * path.values())).transpose();
  std::vector<double> out(g.size(), 0.0);
  double prev = std::exp(e(0));
  for (std::size_t i = 1; i < g.size(); ++i) {
    const double cur = std::exp(e(static_cast<Eigen::Index>(i)));
    out[i] = out[i - 1] + 0.5 * (g[i] - g[i - 1]) * (prev + cur);
    prev = cur;
  }
  return out;
}

ExpFunctionalSet::ExpFunctionalSet(Eigen::VectorXd log_m, Eigen::VectorXd log_v)
    : log_m_(std::move(log_m)), log_v_(std::move(log_v)) {
  require(log_m_.size() >= 1 && log_v_.size() >= 1, "ExpFunctionalSet: empty block");
  require(log_m_.allFinite() && log_v_.allFinite(), "ExpFunctionalSet: non-finite integral");
  m_sigma_ = log_m_.array().exp().sum();
  v_sigma_ = log_v_.array().exp().sum();
  log_m_pi_ = log_m_.sum();
  log_v_pi_ = log_v_.sum();
}

ExpFunctionalSet functional_set(const DiscretePath& sigma, const RootSystem& roots, double s,
                                double t) {
  require(sigma.dim() == roots.rank(), "functional_set: path dimension must equal the rank");
  Eigen::VectorXd lm(roots.m()), lv(roots.n());
  for (Eigen::Index i = 0; i < roots.m(); ++i)
    lm(i) = log_integrate_exponential(sigma, roots.xi().row(i).transpose(), 2.0, s, t);
  for (Eigen::Index j = 0; j < roots.n(); ++j)
    lv(j) = log_integrate_exponential(sigma, roots.theta().row(j).transpose(), 2.0, s, t);
  return ExpFunctionalSet(std::move(lm), std::move(lv));
}

void validate(const InverseGammaLaw& law) {
  require(law.shape > 0.0 && std::isfinite(law.shape), "InverseGammaLaw: shape must be positive");
  require(law.scale > 0.0 && std::isfinite(law.scale), "InverseGammaLaw: scale must be positive");
}

double inverse_gamma_log_density(const InverseGammaLaw& law, double x) {
  validate(law);
  require(x > 0.0, "inverse_gamma_density: x must be positive");
  const double mu = law.shape, g = law.scale;
  return mu * std::log(g) - std::lgamma(mu) - (mu + 1.0) * std::log(x) - g / x;
}

double inverse_gamma_density(const InverseGammaLaw& law, double x) {
  return std::exp(inverse_gamma_log_density(law, x));
}

double inverse_gamma_cdf(const InverseGammaLaw& law, double x) {
  validate(law);
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_q(law.shape, law.scale / x);
}

InverseGammaLaw perpetuity_law(double d, const Eigen::VectorXd& form,
                               const Eigen::VectorXd& alpha) {
  require(d > 0.0, "perpetuity_law: d must be positive");
  require(form.size() == alpha.size(), "perpetuity_law: form/alpha dimension mismatch");
  const double la = form.dot(alpha);
  const double l2 = form.squaredNorm();
  if (!(la > 0.0) || !(l2 > 0.0))
    fail(ErrorCode::DivergentFunctional,
         "perpetuity diverges: l(alpha) = " + std::to_string(la) + " is not positive");
  return {2.0 * la / (d * l2), 1.0 / (d * d * l2)};
}

double sample_perpetuity(double d, const Eigen::VectorXd& form, const Eigen::VectorXd& alpha,
                         const PerpetuityOptions& opts, std::uint64_t seed) {
  perpetuity_law(d, form, alpha);
  require(opts.steps_per_unit >= 1, "sample_perpetuity: steps_per_unit must be positive");
  require(opts.tol > 0.0 && opts.safety > 0.0, "sample_perpetuity: tol and safety must be positive");
  // Only the projection X = l(sigma) matters: drift -2 l(alpha), variance 2 |l|^2 per unit time.
  const double la = form.dot(alpha);
  const double dt = 1.0 / opts.steps_per_unit;
  const double drift = -2.0 * la * dt;
  const double sd = std::sqrt(kVariancePerTime * form.squaredNorm() * dt);
  const double tail_scale = opts.safety / (d * 2.0 * la);
  Rng rng(seed);
  double x = 0.0;
  double prev = 1.0;
  double integral = 0.0;
  double horizon = 0.0;
  while (true) {
    for (int i = 0; i < opts.steps_per_unit; ++i) {
      x += drift + sd * rng.normal();
      const double cur = std::exp(d * x);
      integral += 0.5 * dt * (prev + cur);
      prev = cur;
    }
    horizon += 1.0;
    if (horizon >= opts.min_horizon && tail_scale * prev < opts.tol * integral) break;
    if (horizon >= opts.max_horizon)
      fail(ErrorCode::DivergentFunctional, "sample_perpetuity: horizon cap reached");
  }
  return integral;
}

std::vector<double> sample_perpetuities(std::size_t count, double d,
                                        const Eigen::VectorXd& form,
                                        const Eigen::VectorXd& alpha,
                                        const PerpetuityOptions& opts, std::uint64_t seed,
                                        unsigned workers) {
  perpetuity_law(d, form, alpha);
  std::vector<double> out(count);
  parallel_for(count, workers, [&](std::size_t i) {
    out[i] = sample_perpetuity(d, form, alpha, opts, derive_seed(seed, i));
  });
  return out;
}

}  // namespace nak
