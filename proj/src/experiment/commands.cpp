#include "experiment/commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bounds.hpp"
#include "error.hpp"
#include "evolker.hpp"
#include "expfun.hpp"
#include "liegroup.hpp"
#include "mcstats.hpp"
#include "poisson.hpp"
#include "randpath.hpp"
#include "reflect.hpp"

namespace nak::experiment {

namespace {

using nlohmann::ordered_json;

std::string f(double x) { return format_double(x); }
std::string u(std::size_t x) { return std::to_string(x); }

std::string join(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out.push_back(' ');
    out += f(v(i));
  }
  return out;
}

ordered_json to_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

// Named pass/fail checks collected into summary["checks"].
class Checks {
 public:
  void add(const std::string& name, double value, double threshold, bool ok,
           const std::string& relation) {
    list_.push_back({{"name", name},
                     {"value", value},
                     {"relation", relation},
                     {"threshold", threshold},
                     {"passed", ok}});
    all_ = all_ && ok;
  }
  void add_flag(const std::string& name, bool ok, const std::string& note) {
    list_.push_back({{"name", name}, {"passed", ok}, {"note", note}});
    all_ = all_ && ok;
  }
  bool all() const noexcept { return all_; }
  void store(CommandResult& r) {
    r.summary["checks"] = list_;
    r.passed = all_;
  }

 private:
  ordered_json list_ = ordered_json::array();
  bool all_ = true;
};

std::size_t steps_for(double t, std::size_t per_unit) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t * static_cast<double>(per_unit))));
}

DiscretePath vertical_path(const RootSystem& roots, double t, std::size_t steps, std::uint64_t seed) {
  return sample_bm_drift(roots.rank(), Eigen::VectorXd::Zero(roots.rank()), -2.0 * roots.alpha(), t,
                         steps, seed);
}

std::vector<std::string> coordinate_names(Eigen::Index m, Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < m; ++i) out.push_back("m_" + std::to_string(i + 1));
  for (Eigen::Index j = 0; j < n; ++j) out.push_back("v_" + std::to_string(j + 1));
  return out;
}

// ---------------------------------------------------------------- dufresne

CommandResult cmd_dufresne(const ExperimentConfig& cfg, unsigned workers) {
  const auto& d = cfg.dufresne;
  require(d.n_samples > 0, "verify-dufresne: n_samples must be positive");
  require(!d.mu.empty() || d.lperp, "verify-dufresne: nothing to check");
  PerpetuityOptions opts;
  opts.steps_per_unit = d.steps_per_unit;
  opts.tol = d.tol;
  opts.safety = d.safety;

  CommandResult r;
  r.header = {"case", "mu", "form", "alpha", "shape", "scale", "n_samples", "ks", "ks_max",
              "recip_mean", "recip_expected", "recip_std_error", "status"};
  Checks checks;

  auto run_case = [&](const std::string& label, const Eigen::VectorXd& form,
                      const Eigen::VectorXd& alpha, const InverseGammaLaw& law, double mu,
                      std::uint64_t seed) {
    std::vector<double> s = sample_perpetuities(d.n_samples, 2.0, form, alpha, opts, seed, workers);
    std::vector<double> recip(s.size());
    std::transform(s.begin(), s.end(), recip.begin(), [](double x) { return 1.0 / x; });
    const McEstimate rm = summarize(recip, seed, "reciprocal");
    const double ks = ks_statistic(std::move(s), [&](double x) { return inverse_gamma_cdf(law, x); });
    const double expected = law.shape / law.scale;
    const bool ks_ok = ks <= d.ks_max;
    const bool mean_ok = std::abs(rm.mean - expected) <= 3.0 * rm.std_error;
    checks.add(label + ":ks", ks, d.ks_max, ks_ok, "<=");
    checks.add(label + ":reciprocal_mean", std::abs(rm.mean - expected), 3.0 * rm.std_error,
               mean_ok, "<=");
    r.rows.push_back({label.substr(0, label.find('(')), std::isnan(mu) ? "" : f(mu), join(form), join(alpha), f(law.shape),
                      f(law.scale), u(d.n_samples), f(ks), f(d.ks_max), f(rm.mean), f(expected),
                      f(rm.std_error), ks_ok && mean_ok ? "pass" : "fail"});
  };

  for (std::size_t i = 0; i < d.mu.size(); ++i) {
    const double mu = d.mu[i];
    require(mu > 0.0, "verify-dufresne: mu must be positive");
    const Eigen::VectorXd form = Eigen::VectorXd::Ones(1);
    const Eigen::VectorXd alpha = Eigen::VectorXd::Constant(1, mu / 2.0);
    run_case("dufresne(mu=" + f(mu) + ")", form, alpha, InverseGammaLaw{mu / 2.0, 0.25}, mu, derive_seed(cfg.seed, i));
  }
  if (d.lperp) {
    require(d.lperp_form.size() == d.lperp_alpha.size(),
            "verify-dufresne: lperp_form and lperp_alpha must have equal length");
    run_case("drifted_form", d.lperp_form, d.lperp_alpha,
             perpetuity_law(2.0, d.lperp_form, d.lperp_alpha),
             std::numeric_limits<double>::quiet_NaN(), derive_seed(cfg.seed, d.mu.size()));
  }
  checks.store(r);
  return r;
}

// -------------------------------------------------------------- reflection

struct Extremes {
  std::vector<double> hi, lo, end;
};

// Running max, min and endpoint of variance-2 Brownian paths on [0, 1].
Extremes simulate_extremes(std::size_t n_paths, std::size_t n_steps, std::uint64_t seed,
                           unsigned workers) {
  Extremes e{std::vector<double>(n_paths), std::vector<double>(n_paths), std::vector<double>(n_paths)};
  const double sd = std::sqrt(kVariancePerTime / static_cast<double>(n_steps));
  parallel_for(n_paths, workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    double b = 0.0, hi = 0.0, lo = 0.0;
    for (std::size_t k = 0; k < n_steps; ++k) {
      b += sd * rng.normal();
      hi = std::max(hi, b);
      lo = std::min(lo, b);
    }
    e.hi[i] = hi;
    e.lo[i] = lo;
    e.end[i] = b;
  });
  return e;
}

struct Frequency {
  double p = 0.0;
  double se = 0.0;
};

template <class Pred>
Frequency frequency(const Extremes& e, Pred pred) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < e.end.size(); ++i)
    if (pred(e.hi[i], e.lo[i], e.end[i])) ++hits;
  const double n = static_cast<double>(e.end.size());
  const double p = static_cast<double>(hits) / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

const char* region_name(reflect::Region r) {
  switch (r) {
    case reflect::Region::R1: return "R1";
    case reflect::Region::R2: return "R2";
    case reflect::Region::R3: return "R3";
    case reflect::Region::R4: return "R4";
  }
  return "";
}

CommandResult cmd_reflection(const ExperimentConfig& cfg, unsigned workers) {
  const auto& rc = cfg.reflection;
  require(rc.n_paths >= 2 && rc.n_steps >= 1, "verify-reflection: need n_paths >= 2 and n_steps >= 1");
  const Extremes e = simulate_extremes(rc.n_paths, rc.n_steps, derive_seed(cfg.seed, 0), workers);

  CommandResult r;
  r.header = {"kind", "a", "x", "y", "t", "region", "closed_form", "monte_carlo", "mc_std_error",
              "difference", "tolerance", "status", "note"};
  Checks checks;
  std::size_t skipped = 0;

  for (const auto& q : rc.hit_queries) {
    const double a = q[0], x = q[1], t = q[2];
    const double closed = reflect::prob_hit_then_below(a, x, t);
    const double s = std::sqrt(t);
    const Frequency mc = frequency(e, [&](double hi, double, double end) {
      return hi >= a / s && end <= x / s;
    });
    const double diff = closed - mc.p;
    const bool ok = std::abs(diff) <= rc.tolerance;
    checks.add("hit_then_below(" + f(a) + "," + f(x) + "," + f(t) + ")", std::abs(diff),
               rc.tolerance, ok, "<=");
    r.rows.push_back({"hit_then_below", f(a), f(x), "", f(t), "", f(closed), f(mc.p), f(mc.se),
                      f(diff), f(rc.tolerance), ok ? "pass" : "fail", ""});
  }

  for (const auto& q : rc.sup_queries) {
    const reflect::SupEventQuery sq{q[0], q[1], q[2], q[3]};
    const double s = std::sqrt(sq.t);
    reflect::Region region;
    try {
      region = reflect::classify(sq);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::UnsupportedRegion) throw;
      ++skipped;
      r.rows.push_back({"abs_sup_interval", f(sq.a), f(sq.x), f(sq.y), f(sq.t), "", "", "", "", "",
                        f(rc.margin), "skipped", "window straddles regions; split at -a, 0 or a"});
      continue;
    }
    const double bound = reflect::bound_abs_sup_interval(sq);
    const Frequency mc = frequency(e, [&](double hi, double lo, double end) {
      return std::max(hi, -lo) >= sq.a / s && end >= sq.x / s && end <= sq.y / s;
    });
    const double diff = bound - mc.p;
    const bool ok = diff >= -rc.margin;
    checks.add(std::string("abs_sup_interval_") + region_name(region) + "(" + f(sq.a) + "," +
                   f(sq.x) + "," + f(sq.y) + "," + f(sq.t) + ")",
               diff, -rc.margin, ok, ">=");
    r.rows.push_back({"abs_sup_interval", f(sq.a), f(sq.x), f(sq.y), f(sq.t), region_name(region),
                      f(bound), f(mc.p), f(mc.se), f(diff), f(rc.margin), ok ? "pass" : "fail", ""});
  }

  for (const auto& q : rc.tail_queries) {
    const double x = q[0], y = q[1], t = q[2];
    const double bound = reflect::sup_tail_bound(x, y, t);
    const double s = std::sqrt(t);
    const Frequency mc = frequency(e, [&](double hi, double lo, double) {
      return hi >= (y - x) / s || lo <= (-y - x) / s;
    });
    const double diff = bound - mc.p;
    const bool ok = diff >= -rc.margin;
    checks.add("sup_tail(" + f(x) + "," + f(y) + "," + f(t) + ")", diff, -rc.margin, ok, ">=");
    r.rows.push_back({"sup_tail", "", f(x), f(y), f(t), "", f(bound), f(mc.p), f(mc.se), f(diff),
                      f(rc.margin), ok ? "pass" : "fail", "constant c = 2"});
  }

  for (const auto& q : rc.density_queries) {
    const double a = q[0], n = q[1], t = q[2];
    const double bound = reflect::density_limit_bound(a, n, t);
    const double s = std::sqrt(t), w = rc.density_width;
    const Frequency mc = frequency(e, [&](double hi, double lo, double end) {
      return std::max(hi, -lo) >= a / s && std::abs(end - n / s) <= 0.5 * w / s;
    });
    const double dens = mc.p / w, se = mc.se / w;
    const double diff = bound - dens;
    const double allowance = 3.0 * se + rc.margin;
    const bool ok = diff >= -allowance;
    checks.add("density_limit(" + f(a) + "," + f(n) + "," + f(t) + ")", diff, -allowance, ok, ">=");
    r.rows.push_back({"density_limit", f(a), f(n), "", f(t), "", f(bound), f(dens), f(se), f(diff),
                      f(allowance), ok ? "pass" : "fail", "window width " + f(w)});
  }

  Rng rng(derive_seed(cfg.seed, 1));
  double hit_gap = 0.0, dens_gap = 0.0;
  for (std::size_t i = 0; i < rc.continuity_points; ++i) {
    const double a = 0.1 + 2.9 * rng.uniform();
    const double t = 0.25 + 3.75 * rng.uniform();
    const double below = std::nextafter(a, -std::numeric_limits<double>::infinity());
    hit_gap = std::max(hit_gap, std::abs(reflect::prob_hit_then_below(a, a, t) -
                                         reflect::prob_hit_then_below(a, below, t)));
    dens_gap = std::max(dens_gap, std::abs(reflect::density_limit_bound(a, a, t) -
                                           reflect::density_limit_bound(a, below, t)));
  }
  for (const auto& [name, gap] : {std::pair{"continuity_hit_then_below", hit_gap},
                                  std::pair{"continuity_density_limit", dens_gap}}) {
    const bool ok = gap <= 1e-10;
    checks.add(name, gap, 1e-10, ok, "<=");
    r.rows.push_back({name, "", "", "", "", "", "", "", "", f(gap), f(1e-10), ok ? "pass" : "fail",
                      u(rc.continuity_points) + " boundary points"});
  }

  r.summary["n_paths"] = rc.n_paths;
  r.summary["n_steps"] = rc.n_steps;
  r.summary["skipped"] = skipped;
  checks.store(r);
  return r;
}

// ------------------------------------------------------------------ kernel

std::vector<double> axis(double lo, double hi, double h) {
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / h + 0.5)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + static_cast<double>(i) * h;
  return out;
}

// All points of axis^dim in lexicographic order (last coordinate fastest).
std::vector<Eigen::VectorXd> lattice(const std::vector<double>& ax, Eigen::Index dim) {
  std::size_t total = 1;
  for (Eigen::Index i = 0; i < dim; ++i) total *= ax.size();
  std::vector<Eigen::VectorXd> out(total, Eigen::VectorXd(dim));
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rest = p;
    for (Eigen::Index c = dim - 1; c >= 0; --c) {
      out[p](c) = ax[rest % ax.size()];
      rest /= ax.size();
    }
  }
  return out;
}

DiscretePath kernel_sigma(const ExperimentConfig& cfg, const RootSystem& roots) {
  const auto& k = cfg.kernel;
  const std::size_t steps = steps_for(k.t, k.n_steps);
  if (k.sigma == "zero")
    return DiscretePath(uniform_grid(k.t, steps), Eigen::MatrixXd::Zero(roots.rank(), static_cast<Eigen::Index>(steps + 1)), 0);
  return vertical_path(roots, k.t, steps, derive_seed(cfg.seed, 0));
}

// Diagonal variances of the abelian kernel on [s, t]: 2 A_{M,i} then 2 A_{V,j}.
Eigen::VectorXd abelian_variances(const MetaAbelianGroup& ab, const DiscretePath& path) {
  const double t = path.horizon();
  const DiscretePath eta(path.grid(), Eigen::MatrixXd::Zero(ab.n(), static_cast<Eigen::Index>(path.size())), 0);
  const GaussianKernel km = kernel_M_given_eta(ab, path, eta, t);
  const VKernel kv = kernel_V(path, ab.roots(), t);
  Eigen::VectorXd var(ab.m() + ab.n());
  var << km.A().diagonal(), kv.kernel.A().diagonal();
  return var;
}

double gauss1(double x, double var) {
  return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

struct GridStats {
  double ck_l1 = 0.0;
  double mass = 0.0;
  double spacing = 0.0;
  std::size_t points_per_axis = 0;
};

// Chapman-Kolmogorov on a product grid for the abelian degeneration. The
// kernels are products over coordinates, so the d-dimensional grid
// convolution is the product of one-dimensional grid convolutions.
GridStats chapman_kolmogorov(const Eigen::VectorXd& v1, const Eigen::VectorXd& v2,
                             const Eigen::VectorXd& full) {
  const double sd_max = std::sqrt(full.maxCoeff());
  const double sd_min = std::sqrt(std::min(v1.minCoeff(), v2.minCoeff()));
  const double half = 10.0 * sd_max;
  double h = sd_min / 8.0;
  if (2.0 * half / h > 400.0) h = 2.0 * half / 400.0;
  const std::vector<double> ax = axis(-half, half, h);
  const std::size_t P = ax.size();
  const Eigen::Index d = full.size();

  std::vector<std::vector<double>> conv(static_cast<std::size_t>(d), std::vector<double>(P)),
      exact(static_cast<std::size_t>(d), std::vector<double>(P));
  for (Eigen::Index c = 0; c < d; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    for (std::size_t i = 0; i < P; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < P; ++j) acc += gauss1(ax[j], v1(c)) * gauss1(ax[i] - ax[j], v2(c));
      conv[cc][i] = acc * h;
      exact[cc][i] = gauss1(ax[i], full(c));
    }
  }

  GridStats g;
  g.spacing = h;
  g.points_per_axis = P;
  const double vol = std::pow(h, static_cast<double>(d));
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  for (;;) {
    double pc = 1.0, pe = 1.0;
    for (std::size_t c = 0; c < idx.size(); ++c) {
      pc *= conv[c][idx[c]];
      pe *= exact[c][idx[c]];
    }
    g.ck_l1 += std::abs(pc - pe) * vol;
    g.mass += pe * vol;
    std::size_t c = 0;
    while (c < idx.size() && ++idx[c] == P) idx[c++] = 0;
    if (c == idx.size()) break;
  }
  return g;
}

CommandResult cmd_kernel(const ExperimentConfig& cfg, unsigned workers) {
  const auto& kc = cfg.kernel;
  require(kc.t > 0.0, "kernel: t must be positive");
  require(kc.n_eta >= 2, "kernel: n_eta must be at least 2");
  const MetaAbelianGroup g = build_group(cfg);
  const RootSystem& roots = g.roots();
  const Eigen::Index m = g.m(), n = g.n(), dim = m + n;
  const DiscretePath sigma = kernel_sigma(cfg, roots);
  const SkewProductEstimator est(g, sigma, kc.t);

  const std::vector<double> ax = axis(kc.grid_min, kc.grid_max, kc.spacing);
  const double total = std::pow(static_cast<double>(ax.size()), static_cast<double>(dim));
  if (total > 4e6) fail(ErrorCode::ConfigError, "[kernel] grid has more than 4e6 points");
  const std::vector<Eigen::VectorXd> ms = lattice(ax, m), vs = lattice(ax, n);
  const double vol_m = std::pow(kc.spacing, static_cast<double>(m));
  const double vol = vol_m * std::pow(kc.spacing, static_cast<double>(n));

  CommandResult r;
  r.header = coordinate_names(m, n);
  for (const char* c : {"density", "std_error", "median_of_means", "v_density"}) r.header.push_back(c);
  Checks checks;

  // grid estimates, normalization and the m-marginal
  double mass = 0.0, worst_excess = -std::numeric_limits<double>::infinity();
  double worst_gap = 0.0;
  const std::uint64_t fiber_seed = derive_seed(cfg.seed, 1);
  std::vector<double> per_eta(kc.n_eta), vals(kc.n_eta);
  for (std::size_t vi = 0; vi < vs.size(); ++vi) {
    const Eigen::VectorXd& v = vs[vi];
    const double log_v = est.v_kernel().kernel.log_density(v);
    const std::uint64_t seed = derive_seed(fiber_seed, vi);
    const Eigen::MatrixXd logk = est.log_m_density(v, ms, kc.n_eta, seed, workers);
    std::fill(per_eta.begin(), per_eta.end(), 0.0);
    for (Eigen::Index c = 0; c < logk.cols(); ++c) {
      for (Eigen::Index i = 0; i < logk.rows(); ++i) {
        const double x = std::exp(logk(i, c) + log_v);
        vals[static_cast<std::size_t>(i)] = x;
        per_eta[static_cast<std::size_t>(i)] += x * vol_m;
      }
      const McEstimate e = summarize(vals, seed, "skew-product");
      mass += e.mean * vol;
      std::vector<std::string> row;
      const Eigen::VectorXd& mm = ms[static_cast<std::size_t>(c)];
      for (Eigen::Index i = 0; i < m; ++i) row.push_back(f(mm(i)));
      for (Eigen::Index j = 0; j < n; ++j) row.push_back(f(v(j)));
      row.push_back(f(e.mean));
      row.push_back(f(e.std_error));
      row.push_back(f(e.median_of_means));
      row.push_back(f(std::exp(log_v)));
      r.rows.push_back(std::move(row));
    }
    const McEstimate marg = summarize(per_eta, seed, "m-marginal");
    const double gap = std::abs(marg.mean - std::exp(log_v));
    worst_gap = std::max(worst_gap, gap);
    worst_excess = std::max(worst_excess, gap - 3.0 * marg.std_error - kc.marginal_tol);
  }
  checks.add("normalization", std::abs(mass - 1.0), kc.normalization_tol,
             std::abs(mass - 1.0) <= kc.normalization_tol, "<=");
  checks.add("m_marginal_excess", worst_excess, 0.0, worst_excess <= 0.0, "<=");
  r.summary["grid"] = {{"min", kc.grid_min}, {"max", kc.grid_max}, {"spacing", kc.spacing},
                       {"points", r.rows.size()}, {"mass", mass},
                       {"max_marginal_gap", worst_gap}};
  r.summary["sigma"] = kc.sigma;
  r.summary["functionals"] = {{"log_m", to_json(est.functionals().log_m_roots())},
                              {"log_v", to_json(est.functionals().log_v_roots())}};

  // constant-coefficient kernel against the variance-2 heat kernel
  {
    const std::vector<double> grid = uniform_grid(kc.t, steps_for(kc.t, kc.n_steps));
    const Eigen::VectorXd drift = Eigen::VectorXd::LinSpaced(dim, 0.5, -0.5);
    std::vector<Eigen::MatrixXd> a(grid.size(), 2.0 * Eigen::MatrixXd::Identity(dim, dim));
    std::vector<Eigen::VectorXd> b0(grid.size(), Eigen::VectorXd::Zero(dim)), b1(grid.size(), drift);
    const GaussianKernel k0 = GaussianKernel::from_coefficients(grid, a, b0);
    const GaussianKernel k1 = GaussianKernel::from_coefficients(grid, a, b1);
    const std::vector<double> probe{-2.5, 0.0, 1.5};
    double worst = 0.0;
    for (const auto& x : lattice(probe, dim)) {
      const double norm = std::pow(4.0 * std::numbers::pi * kc.t, -0.5 * static_cast<double>(dim));
      const double h0 = norm * std::exp(-x.squaredNorm() / (4.0 * kc.t));
      const double h1 = norm * std::exp(-(x - kc.t * drift).squaredNorm() / (4.0 * kc.t));
      worst = std::max({worst, std::abs(k0.density(x) - h0) / h0, std::abs(k1.density(x) - h1) / h1});
    }
    checks.add("heat_kernel_relative_error", worst, 1e-12, worst <= 1e-12, "<=");

    const std::vector<double> line = axis(-40.0, 40.0, 0.01);
    const GaussianKernel k(Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Zero(1));
    double integral = 0.0;
    for (std::size_t i = 1; i < line.size(); ++i)
      integral += 0.5 * 0.01 * (k.density(Eigen::VectorXd::Constant(1, line[i - 1])) +
                                k.density(Eigen::VectorXd::Constant(1, line[i])));
    checks.add("quadrature_normalization_1d", std::abs(integral - 1.0), 1e-6,
               std::abs(integral - 1.0) <= 1e-6, "<=");
  }

  // abelian degeneration
  MetaAbelianGroup::Options opts;
  opts.allow_abelian = true;
  const MetaAbelianGroup ab = build_group(cfg, opts);
  if (kc.abelian_check) {
    const SkewProductEstimator est_ab(ab, sigma, kc.t);
    Eigen::VectorXd diag_m(m);
    for (Eigen::Index i = 0; i < m; ++i) diag_m(i) = 2.0 * est_ab.functionals().m_root(i);
    const GaussianKernel km(diag_m.asDiagonal().toDenseMatrix(), Eigen::VectorXd::Zero(m));
    const std::vector<double> probe{0.5 * kc.grid_min, 0.0, 0.5 * kc.grid_max};
    double worst_rel = 0.0, worst_se = 0.0;
    std::size_t idx = 0;
    for (const auto& p : lattice(probe, dim)) {
      const GroupElement x{p.head(m), p.tail(n)};
      const McEstimate e = est_ab.estimate(x, kc.n_eta, derive_seed(derive_seed(cfg.seed, 3), idx++), workers);
      const double closed = est_ab.v_kernel().kernel.density(x.v) * km.density(x.m);
      worst_rel = std::max(worst_rel, std::abs(e.mean - closed) / closed);
      worst_se = std::max(worst_se, e.std_error / closed);
    }
    checks.add("abelian_closed_form_relative_error", worst_rel, 1e-10, worst_rel <= 1e-10, "<=");
    checks.add("abelian_eta_relative_std_error", worst_se, 1e-12, worst_se <= 1e-12, "<=");
  }

  // Chapman-Kolmogorov and grid normalization, abelian degeneration
  {
    const double s = 0.5 * kc.t;
    const Eigen::VectorXd v1 = abelian_variances(ab, sigma.truncated(s));
    const Eigen::VectorXd v2 = abelian_variances(ab, sigma.window(s, kc.t));
    const Eigen::VectorXd vf = abelian_variances(ab, sigma);
    const GridStats gs = chapman_kolmogorov(v1, v2, vf);
    checks.add("chapman_kolmogorov_l1", gs.ck_l1, 1e-3, gs.ck_l1 < 1e-3, "<");
    checks.add("quadrature_normalization_grid", std::abs(gs.mass - 1.0), 1e-6,
               std::abs(gs.mass - 1.0) <= 1e-6, "<=");
    r.summary["chapman_kolmogorov"] = {{"spacing", gs.spacing},
                                       {"points_per_axis", gs.points_per_axis},
                                       {"l1", gs.ck_l1},
                                       {"mass", gs.mass}};
  }

  // determinant inequality det A_M >= 2^m prod A_{M,i} on random (sigma, eta)
  if (kc.det_samples > 0) {
    const std::size_t steps = steps_for(kc.t, kc.n_steps);
    const std::uint64_t base = derive_seed(cfg.seed, 2);
    std::vector<double> margin(kc.det_samples);
    parallel_for(kc.det_samples, workers, [&](std::size_t i) {
      const std::uint64_t si = derive_seed(base, i);
      const DiscretePath sg = vertical_path(roots, kc.t, steps, derive_seed(si, 0));
      const DiscretePath eta = sample_bm_drift(n, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n),
                                               kc.t, steps, derive_seed(si, 1));
      const GaussianKernel k = kernel_M_given_eta(g, sg, eta, kc.t);
      const ExpFunctionalSet fs = functional_set(sg, roots, 0.0, kc.t);
      margin[i] = k.log_det_A() - (static_cast<double>(m) * std::log(2.0) + fs.log_m_pi());
    });
    const double floor = std::log1p(-kc.det_slack);
    const auto violations = static_cast<std::size_t>(
        std::count_if(margin.begin(), margin.end(), [&](double x) { return x < floor; }));
    checks.add("determinant_violations", static_cast<double>(violations), 0.0, violations == 0, "<=");
    r.summary["determinant"] = {{"samples", kc.det_samples},
                                {"violations", violations},
                                {"min_log_margin", *std::min_element(margin.begin(), margin.end())}};
  }

  checks.store(r);
  return r;
}

// ------------------------------------------------------------------ bounds

CommandResult cmd_bounds(const ExperimentConfig& cfg, unsigned workers) {
  const auto& bc = cfg.bounds;
  require(bc.t > 0.0 && bc.box > 0.0, "verify-bounds: t and box must be positive");
  const MetaAbelianGroup g = build_group(cfg);
  const RootSystem& roots = g.roots();
  const std::size_t total = bc.n_fit + bc.n_holdout;
  const std::size_t steps = steps_for(bc.t, bc.n_steps);

  std::vector<std::optional<BoundSample>> raw(total);
  parallel_for(total, workers, [&](std::size_t i) {
    const std::uint64_t si = derive_seed(cfg.seed, i);
    const DiscretePath sg = vertical_path(roots, bc.t, steps, derive_seed(si, 0));
    Rng rng(derive_seed(si, 1));
    GroupElement x{Eigen::VectorXd(g.m()), Eigen::VectorXd(g.n())};
    for (Eigen::Index c = 0; c < g.m(); ++c) x.m(c) = bc.box * (2.0 * rng.uniform() - 1.0);
    for (Eigen::Index c = 0; c < g.n(); ++c) x.v(c) = bc.box * (2.0 * rng.uniform() - 1.0);
    const SkewProductEstimator est(g, sg, bc.t);
    const McEstimate e = est.estimate(x, bc.n_eta, derive_seed(si, 2));
    raw[i] = BoundSample{e.mean, e.std_error, x.m, x.v, est.functionals()};
  });
  std::vector<BoundSample> fit, hold;
  for (std::size_t i = 0; i < total; ++i)
    if (raw[i]->kernel > 0.0) (i < bc.n_fit ? fit : hold).push_back(*raw[i]);

  CommandResult r;
  r.header = {"bound", "rule", "n_fit", "n_holdout", "C", "D", "fit_violations",
              "holdout_violations", "holdout_rate", "max_rate", "status"};
  Checks checks;
  for (const auto& name : bc.bounds) {
    const BoundKind kind = parse_bound_kind(name);
    for (const FitRule rule : {FitRule::SmallestD, FitRule::LargestD}) {
      const std::string rule_name = rule == FitRule::SmallestD ? "smallest_d" : "largest_d";
      const std::string label = name + ":" + rule_name;
      try {
        const BoundConstants c = fit_constants(fit, g, kind, rule);
        const std::size_t vf = count_violations(fit, g, kind, c, bc.slack);
        const std::size_t vh = count_violations(hold, g, kind, c, bc.slack);
        const double rate =
            hold.empty() ? 0.0 : static_cast<double>(vh) / static_cast<double>(hold.size());
        const bool ok = rate <= bc.max_violation_rate;
        checks.add(label + ":holdout_violation_rate", rate, bc.max_violation_rate, ok, "<=");
        r.rows.push_back({name, rule_name, u(fit.size()), u(hold.size()), f(c.C), f(c.D), u(vf),
                          u(vh), f(rate), f(bc.max_violation_rate), ok ? "pass" : "fail"});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::FitFailure && e.code() != ErrorCode::InvalidArgument) throw;
        checks.add_flag(label + ":fit", false, e.what());
        r.rows.push_back({name, rule_name, u(fit.size()), u(hold.size()), "", "", "", "", "",
                          f(bc.max_violation_rate), "fit-failure"});
      }
    }
  }
  r.summary["dropped_zero_kernels"] = total - fit.size() - hold.size();
  checks.store(r);
  return r;
}

// ----------------------------------------------------------------- poisson

std::vector<std::string> estimate_row(const std::string& kind, const std::string& label,
                                      const std::string& radius, const PoissonEstimate& e,
                                      const std::string& included) {
  std::vector<std::string> row{kind, label, radius};
  for (Eigen::Index i = 0; i < e.point.m.size(); ++i) row.push_back(f(e.point.m(i)));
  for (Eigen::Index j = 0; j < e.point.v.size(); ++j) row.push_back(f(e.point.v(j)));
  for (double x : {e.value.mean, e.value.std_error, e.value.median_of_means, e.value.mom_std_error,
                   e.half_value.mean, e.diff_mean, e.diff_std_error})
    row.push_back(f(x));
  row.push_back(format_bool(e.converged));
  row.push_back(included);
  return row;
}

CommandResult cmd_poisson(const ExperimentConfig& cfg, unsigned workers) {
  const MetaAbelianGroup g = build_group(cfg);
  g.roots().require_alpha_positive();
  const auto& pc = cfg.poisson;
  PoissonArgs args;
  args.horizon = cfg.budget.horizon;
  args.n_sigma = cfg.budget.n_sigma;
  args.n_eta = cfg.budget.n_eta;
  args.steps_per_unit = cfg.budget.n_steps;
  args.workers = workers;
  validate(args);

  CommandResult r;
  r.header = {"kind", "label", "radius"};
  for (const auto& c : coordinate_names(g.m(), g.n())) r.header.push_back(c);
  for (const char* c : {"mean", "std_error", "median_of_means", "mom_std_error", "half_horizon_mean",
                        "diff_mean", "diff_std_error", "converged", "included"})
    r.header.push_back(c);
  Checks checks;

  for (std::size_t i = 0; i < pc.points_m.size(); ++i) {
    GroupElement x{Eigen::Map<const Eigen::VectorXd>(pc.points_m[i].data(), g.m()),
                   Eigen::Map<const Eigen::VectorXd>(pc.points_v[i].data(), g.n())};
    PoissonArgs a = args;
    a.seed = derive_seed(derive_seed(cfg.seed, 0), i);
    const PoissonEstimate e = estimate_nu(g, x, a);
    checks.add_flag("point_" + u(i) + ":converged", e.converged, "horizon doubling test");
    r.rows.push_back(estimate_row("point", u(i), "", e, ""));
  }

  const GroupElement raw{pc.direction_m, pc.direction_v};
  const double r0 = g.homogeneous_norm(cfg.rho, raw);
  require(r0 > 0.0, "poisson: direction must not be the identity");
  const GroupElement direction = g.dilate(cfg.rho, 1.0 / r0, raw);

  if (pc.decay) {
    const ExponentRegion region = parse_exponent_region(pc.region);
    const double gamma = exponent_newupper(g.roots(), cfg.rho, region);
    PoissonArgs a = args;
    a.seed = derive_seed(cfg.seed, 1);
    const DecayFit fit = decay_regression(g, direction, cfg.rho, pc.radii, a);
    for (std::size_t i = 0; i < fit.radii.size(); ++i)
      r.rows.push_back(estimate_row("decay", "", f(fit.radii[i]), fit.estimates[i],
                                    format_bool(fit.included[i])));
    const double threshold = -gamma + pc.slope_tolerance;
    checks.add("decay_slope_median_of_means", fit.fit.slope, threshold, fit.fit.slope <= threshold, "<=");
    r.summary["decay"] = {{"region", to_string(region)},
                          {"exponent", gamma},
                          {"threshold", threshold},
                          {"slope", fit.fit.slope},
                          {"slope_std_error", fit.fit.slope_std_error},
                          {"intercept", fit.fit.intercept},
                          {"mean_slope", fit.fit_mean.slope},
                          {"mean_slope_std_error", fit.fit_mean.slope_std_error},
                          {"direction_m", to_json(direction.m)},
                          {"direction_v", to_json(direction.v)},
                          {"rho", to_json(cfg.rho)}};
  }

  if (pc.scaling_check) {
    PoissonArgs a = args;
    a.seed = derive_seed(cfg.seed, 2);
    const PoissonEstimate direct = nu_srho(g, direction, pc.scaling_s, cfg.rho, a);
    const PoissonEstimate scaled = nu_srho_scaled(g, direction, pc.scaling_s, cfg.rho, a);
    const double gap = std::abs(direct.value.mean - scaled.value.mean);
    const double tol = 3.0 * std::hypot(direct.value.std_error, scaled.value.std_error);
    checks.add("scaling_identity", gap, tol, gap <= tol, "<=");
    r.rows.push_back(estimate_row("scaling_direct", f(pc.scaling_s), "", direct, ""));
    r.rows.push_back(estimate_row("scaling_shifted", f(pc.scaling_s), "", scaled, ""));
  }

  r.summary["budget"] = {{"horizon", args.horizon},
                         {"n_sigma", args.n_sigma},
                         {"n_eta", args.n_eta},
                         {"steps_per_unit", args.steps_per_unit}};
  checks.store(r);
  return r;
}

// --------------------------------------------------------------- exponents

bool is_reference_heisenberg(const ExperimentConfig& cfg) {
  const auto& gs = cfg.group;
  if (gs.preset != "heisenberg" || cfg.rho.size() != 2) return false;
  return gs.xi1.size() == 2 && gs.xi1(0) == 1.0 && gs.xi1(1) == 0.0 && gs.xi2(0) == 0.0 &&
         gs.xi2(1) == 1.0 && cfg.rho(0) == 1.0 && cfg.rho(1) == 2.0;
}

CommandResult cmd_exponents(const ExperimentConfig& cfg, unsigned) {
  const MetaAbelianGroup g = build_group(cfg);
  const RootSystem& roots = g.roots();
  const bool ref = is_reference_heisenberg(cfg);
  const double a1 = ref ? cfg.alpha(0) : 0.0, a2 = ref ? cfg.alpha(1) : 0.0;
  const double mn = std::min(a1, a2);

  CommandResult r;
  r.header = {"theorem", "region", "q", "exponent", "rho0_rho", "reference", "matches"};
  Checks checks;
  auto emit = [&](const std::string& thm, const std::string& region, const std::string& q,
                  double value, const std::string& rho0, double reference) {
    std::string ref_s, match_s;
    if (ref) {
      const bool ok = value == reference;
      ref_s = f(reference);
      match_s = format_bool(ok);
      checks.add(thm + (region.empty() ? "" : ":" + region) + (q.empty() ? "" : ":q=" + q),
                 value, reference, ok, "==");
    }
    r.rows.push_back({thm, region, q, f(value), rho0, ref_s, match_s});
  };

  const ThCMExponent cm = exponent_thcm(roots, cfg.rho);
  emit("thCM", "", "", cm.gamma_alpha, f(cm.rho0_rho), 2.0 * mn);
  for (double q : cfg.exponents.q) {
    const double best = std::min({a1 * a1, a2 * a2, (a1 + a2) * (a1 + a2) / 2.0});
    emit("Thpota", "", f(q), exponent_thpota(roots, q), "", 2.0 * best / q);
  }
  emit("newupper", "both", "", exponent_newupper(roots, cfg.rho, ExponentRegion::Both), "",
       a1 / 2.0 + mn / 2.0);
  emit("newupper", "v_large", "", exponent_newupper(roots, cfg.rho, ExponentRegion::VLarge), "", a1);
  emit("newupper", "m_large", "", exponent_newupper(roots, cfg.rho, ExponentRegion::MLarge), "", mn);

  r.summary["reference_comparison"] = ref;
  r.summary["alpha"] = to_json(cfg.alpha);
  r.summary["rho"] = to_json(cfg.rho);
  checks.store(r);
  return r;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"verify-dufresne", "verify-reflection", "kernel",
                                              "verify-bounds",   "poisson",           "exponents"};
  return names;
}

CommandResult run_command(const std::string& name, const ExperimentConfig& cfg, unsigned workers) {
  require(workers >= 1, "workers must be at least 1");
  CommandResult r;
  if (name == "verify-dufresne") r = cmd_dufresne(cfg, workers);
  else if (name == "verify-reflection") r = cmd_reflection(cfg, workers);
  else if (name == "kernel") r = cmd_kernel(cfg, workers);
  else if (name == "verify-bounds") r = cmd_bounds(cfg, workers);
  else if (name == "poisson") r = cmd_poisson(cfg, workers);
  else if (name == "exponents") r = cmd_exponents(cfg, workers);
  else fail(ErrorCode::InvalidArgument, "unknown command '" + name + "'");
  r.command = name;
  return r;
}

}  // namespace nak::experiment
