#include "poisson.hpp"

#include <cmath>

#include "error.hpp"
#include "evolker.hpp"
#include "randpath.hpp"

namespace nak {

namespace {

void scale_estimate(McEstimate& e, double f) {
  e.mean *= f;
  e.std_error *= f;
  e.median_of_means *= f;
  e.mom_std_error *= f;
}

void require_unit_sphere(const MetaAbelianGroup& g, const GroupElement& x0,
                         const Eigen::VectorXd& rho) {
  const double r = g.homogeneous_norm(rho, x0);
  require(std::abs(r - 1.0) <= 1e-9, "nu_srho: x0 must lie on the unit rho-sphere");
}

}  // namespace

void validate(const PoissonArgs& a) {
  require(a.horizon > 0.0 && std::isfinite(a.horizon), "poisson: horizon must be positive");
  require(a.n_sigma >= 2, "poisson: n_sigma must be at least 2");
  require(a.n_eta >= 2, "poisson: n_eta must be at least 2");
  require(a.steps_per_unit >= 2, "poisson: steps_per_unit must be at least 2");
}

PoissonEstimate estimate_nu(const MetaAbelianGroup& g, const GroupElement& x,
                            const PoissonArgs& args, const Eigen::VectorXd& start) {
  validate(args);
  g.roots().require_alpha_positive();
  g.check_element(x);
  const Eigen::Index k = g.roots().rank();
  const Eigen::VectorXd a = start.size() == 0 ? Eigen::VectorXd::Zero(k) : start;
  require(a.size() == k, "estimate_nu: start has wrong rank");
  const Eigen::VectorXd drift = -2.0 * g.roots().alpha();
  const GroupElement target = g.inverse(x);
  const auto n_steps =
      static_cast<std::size_t>(std::ceil(args.horizon * static_cast<double>(args.steps_per_unit)));

  std::vector<double> full(args.n_sigma), half(args.n_sigma), diff(args.n_sigma);
  parallel_for(args.n_sigma, args.workers, [&](std::size_t i) {
    const std::uint64_t s = derive_seed(args.seed, i);
    const DiscretePath sigma = sample_bm_drift(k, a, drift, args.horizon, n_steps, derive_seed(s, 0));
    const std::uint64_t eta_seed = derive_seed(s, 1);
    full[i] = SkewProductEstimator(g, sigma, args.horizon).estimate(target, args.n_eta, eta_seed).mean;
    half[i] =
        SkewProductEstimator(g, sigma, 0.5 * args.horizon).estimate(target, args.n_eta, eta_seed).mean;
    diff[i] = full[i] - half[i];
  });

  PoissonEstimate out;
  out.point = x;
  out.value = summarize(full, args.seed, "nested-skew-product");
  out.half_value = summarize(half, args.seed, "nested-skew-product-half-horizon");
  const McEstimate d = summarize(diff, args.seed, "paired-difference");
  out.diff_mean = d.mean;
  out.diff_std_error = d.std_error;
  out.horizon = args.horizon;
  out.n_sigma = args.n_sigma;
  out.n_eta = args.n_eta;
  out.converged = std::abs(out.value.mean - out.half_value.mean) <=
                  3.0 * std::hypot(out.value.std_error, out.half_value.std_error);
  return out;
}

RegressionResult fit_decay(std::span<const double> radii, std::span<const double> values,
                           std::span<const double> std_errors) {
  const std::size_t n = radii.size();
  require(n >= 2, "fit_decay: need at least two points");
  require(values.size() == n && std_errors.size() == n, "fit_decay: length mismatch");
  bool unit = false;
  for (std::size_t i = 0; i < n; ++i) {
    require(radii[i] >= 0.0, "fit_decay: radii must be non-negative");
    require(values[i] > 0.0 && std::isfinite(values[i]), "fit_decay: values must be positive");
    if (i > 0) require(radii[i] > radii[i - 1], "fit_decay: radii must be strictly increasing");
    if (!(std_errors[i] > 0.0)) unit = true;
  }
  std::vector<double> x(n), y(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log1p(radii[i]);
    y[i] = std::log(values[i]);
    w[i] = unit ? 1.0 : (values[i] / std_errors[i]) * (values[i] / std_errors[i]);
  }
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  RegressionResult r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  if (!unit) {
    r.slope_std_error = std::sqrt(1.0 / sxx);
  } else if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = y[i] - r.intercept - r.slope * x[i];
      rss += w[i] * e * e;
    }
    r.slope_std_error = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  return r;
}

DecayFit decay_regression(const MetaAbelianGroup& g, const GroupElement& direction,
                          const Eigen::VectorXd& rho, std::span<const double> radii,
                          const PoissonArgs& args) {
  require(radii.size() >= 2, "decay_regression: need at least two radii");
  require_unit_sphere(g, direction, rho);
  DecayFit out;
  out.direction = direction;
  out.rho = rho;
  out.radii.assign(radii.begin(), radii.end());
  std::vector<double> r_in, mom, mom_se, mean, mean_se;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require(radii[i] >= 1.0, "decay_regression: radii must be at least 1");
    if (i > 0) require(radii[i] > radii[i - 1], "decay_regression: radii must be strictly increasing");
    PoissonArgs a = args;
    a.seed = derive_seed(args.seed, i);
    out.estimates.push_back(estimate_nu(g, g.dilate(rho, radii[i], direction), a));
    const auto& e = out.estimates.back();
    const bool ok = e.converged && e.value.median_of_means > 0.0 && e.value.mean > 0.0;
    out.included.push_back(ok);
    out.log_values.push_back(std::log(e.value.median_of_means));
    if (ok) {
      r_in.push_back(radii[i]);
      mom.push_back(e.value.median_of_means);
      mom_se.push_back(e.value.mom_std_error);
      mean.push_back(e.value.mean);
      mean_se.push_back(e.value.std_error);
    }
  }
  if (r_in.size() < 2)
    fail(ErrorCode::FitFailure, "decay_regression: fewer than two converged radii");
  out.fit = fit_decay(r_in, mom, mom_se);
  out.fit_mean = fit_decay(r_in, mean, mean_se);
  return out;
}

PoissonEstimate nu_srho(const MetaAbelianGroup& g, const GroupElement& x0, double s,
                        const Eigen::VectorXd& rho, const PoissonArgs& args) {
  require(s <= 0.0, "nu_srho: s must be non-positive");
  require_unit_sphere(g, x0, rho);
  return estimate_nu(g, g.dilate(rho, std::exp(-s), x0), args);
}

PoissonEstimate nu_srho_scaled(const MetaAbelianGroup& g, const GroupElement& x0, double s,
                               const Eigen::VectorXd& rho, const PoissonArgs& args) {
  require(s <= 0.0, "nu_srho: s must be non-positive");
  require_unit_sphere(g, x0, rho);
  const Eigen::VectorXd a = s * rho;
  PoissonEstimate e = estimate_nu(g, x0, args, a);
  const double f = chi(g.roots(), a);
  scale_estimate(e.value, f);
  scale_estimate(e.half_value, f);
  e.diff_mean *= f;
  e.diff_std_error *= f;
  e.point = g.dilate(rho, std::exp(-s), x0);
  return e;
}

}  // namespace nak
