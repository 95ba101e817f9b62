#include "bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace nak {

namespace {

// RHS = C * sum_t exp(log_pref_t - D * rate_t)
struct RhsTerms {
  double log_pref[2] = {0.0, 0.0};
  double rate[2] = {0.0, 0.0};
  int count = 0;
};

int require_k(const MetaAbelianGroup& g) {
  require(g.k_o() >= 1, "kernel bounds need a non-abelian group (k_o >= 1)");
  return g.k_o();
}

RhsTerms terms(BoundKind kind, const MetaAbelianGroup& g, const Eigen::VectorXd& m,
               const Eigen::VectorXd& v, const ExpFunctionalSet& f) {
  require(m.size() == g.m() && v.size() == g.n(), "bound: point has wrong dimension");
  require(f.m() == g.m() && f.n() == g.n(), "bound: functionals do not match the group");
  const int k = require_k(g);
  const double nm = m.norm(), nv = v.norm();
  const double r2k = std::pow(nm, 1.0 / (2.0 * k));
  const double rk = std::pow(nm, 1.0 / k);
  RhsTerms t;
  if (kind == BoundKind::Ubpsigma) {
    t.count = 1;
    t.log_pref[0] = std::log(r2k + 1.0 + std::sqrt(f.v_sigma())) - 0.5 * f.log_n_pi();
    t.rate[0] = nv * nv / f.v_sigma() + rk * phi_k(m, 2 * k) / f.n_sigma();
  } else {
    t.count = 2;
    const double norm = -0.5 * (f.log_m_pi() + f.log_v_pi());
    t.log_pref[0] = std::log(r2k + 1.0) + norm;
    t.rate[0] = nm * nm / (std::pow(r2k + nv + 2.0, 2.0 * k) * f.m_sigma());
    t.log_pref[1] = 0.5 * std::log(f.v_sigma()) + norm;
    t.rate[1] = (rk + nv * nv) / f.v_sigma();
  }
  return t;
}

// log of sum_t exp(log_pref_t - D rate_t)
double log_shape(const RhsTerms& t, double D) {
  double top = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < t.count; ++i) top = std::max(top, t.log_pref[i] - D * t.rate[i]);
  double s = 0.0;
  for (int i = 0; i < t.count; ++i) s += std::exp(t.log_pref[i] - D * t.rate[i] - top);
  return top + std::log(s);
}

void require_chamber(const RootSystem& roots, const Eigen::VectorXd& a, const char* what) {
  require(a.size() == roots.rank(), std::string(what) + " has wrong rank");
  require(roots.in_positive_chamber(a), std::string(what) + " must lie in A+");
}

}  // namespace

void validate(const BoundConstants& c) {
  require(c.C > 0.0 && std::isfinite(c.C) && c.D > 0.0 && std::isfinite(c.D),
          "BoundConstants: C and D must be positive");
}

BoundKind parse_bound_kind(const std::string& name) {
  if (name == "ubpsigma") return BoundKind::Ubpsigma;
  if (name == "preest") return BoundKind::Preest;
  fail(ErrorCode::InvalidArgument, "unknown bound '" + name + "'");
}

const char* to_string(BoundKind kind) noexcept {
  return kind == BoundKind::Ubpsigma ? "ubpsigma" : "preest";
}

double bound_rhs(BoundKind kind, const MetaAbelianGroup& g, const Eigen::VectorXd& m,
                 const Eigen::VectorXd& v, const ExpFunctionalSet& funcs, const BoundConstants& c) {
  validate(c);
  return c.C * std::exp(log_shape(terms(kind, g, m, v, funcs), c.D));
}

double ubpsigma_rhs(const MetaAbelianGroup& g, const Eigen::VectorXd& m, const Eigen::VectorXd& v,
                    const ExpFunctionalSet& funcs, const BoundConstants& c) {
  return bound_rhs(BoundKind::Ubpsigma, g, m, v, funcs, c);
}

double preest_rhs(const MetaAbelianGroup& g, const Eigen::VectorXd& m, const Eigen::VectorXd& v,
                  const ExpFunctionalSet& funcs, const BoundConstants& c) {
  return bound_rhs(BoundKind::Preest, g, m, v, funcs, c);
}

BoundConstants fit_constants(std::span<const BoundSample> samples, const MetaAbelianGroup& g,
                             BoundKind kind, FitRule rule) {
  require(samples.size() >= 10, "fit_constants: need at least 10 samples");
  std::vector<RhsTerms> t;
  std::vector<double> log_k;
  t.reserve(samples.size());
  for (const auto& s : samples) {
    require(s.kernel > 0.0 && std::isfinite(s.kernel), "fit_constants: kernel values must be positive");
    t.push_back(terms(kind, g, s.m, s.v, s.funcs));
    log_k.push_back(std::log(s.kernel));
  }
  const int n_grid = static_cast<int>((kFitLogDMax - kFitLogDMin) * kFitDStepsPerOctave);
  const double log_c_max = kFitLogCMax * std::log(2.0);
  for (int j = 0; j <= n_grid; ++j) {
    const int i = rule == FitRule::SmallestD ? j : n_grid - j;
    const double D = std::exp2(kFitLogDMin + static_cast<double>(i) / kFitDStepsPerOctave);
    double log_c = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < t.size(); ++k) log_c = std::max(log_c, log_k[k] - log_shape(t[k], D));
    if (log_c <= log_c_max) return {std::exp(log_c) * (1.0 + kFitCSlack), D, ConstantsProvenance::Fitted};
  }
  fail(ErrorCode::FitFailure, std::string("fit_constants: no feasible (C, D) for ") + to_string(kind) +
                                  " on the search grid");
}

std::size_t count_violations(std::span<const BoundSample> samples, const MetaAbelianGroup& g,
                             BoundKind kind, const BoundConstants& c, double slack) {
  std::size_t bad = 0;
  for (const auto& s : samples)
    if (bound_rhs(kind, g, s.m, s.v, s.funcs, c) < s.kernel - slack * s.std_error) ++bad;
  return bad;
}

ExponentRegion parse_exponent_region(const std::string& name) {
  if (name == "both") return ExponentRegion::Both;
  if (name == "v_large") return ExponentRegion::VLarge;
  if (name == "m_large") return ExponentRegion::MLarge;
  fail(ErrorCode::InvalidArgument, "unknown region '" + name + "'");
}

const char* to_string(ExponentRegion r) noexcept {
  switch (r) {
    case ExponentRegion::Both: return "both";
    case ExponentRegion::VLarge: return "v_large";
    case ExponentRegion::MLarge: return "m_large";
  }
  return "both";
}

bool in_region(const MetaAbelianGroup& g, ExponentRegion r, RegionPredicate p,
               const Eigen::VectorXd& m, const Eigen::VectorXd& v, double eps) {
  require(eps > 0.0, "in_region: eps must be positive");
  const bool v_big = v.norm() >= eps;
  const bool m_big = p == RegionPredicate::Norm ? m.norm() >= eps
                                                : phi_k(m, 2 * require_k(g)) >= eps;
  switch (r) {
    case ExponentRegion::Both: return m_big && v_big;
    case ExponentRegion::VLarge: return v_big;
    case ExponentRegion::MLarge: return m_big;
  }
  return false;
}

ThCMExponent exponent_thcm(const RootSystem& roots, const Eigen::VectorXd& rho) {
  require_chamber(roots, rho, "rho");
  require_chamber(roots, roots.alpha(), "alpha");
  return {2.0 * gamma_bar(roots, RootSubset::Lambda, roots.alpha()), rho_zero(roots, rho)};
}

double exponent_thpota(const RootSystem& roots, double q) {
  require(q > 1.0, "exponent_thpota: q must exceed 1");
  require_chamber(roots, roots.alpha(), "alpha");
  const Eigen::MatrixXd f = roots.lambda();
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < f.rows(); ++r) {
    const double la = f.row(r).dot(roots.alpha());
    best = std::min(best, la * la / f.row(r).squaredNorm());
  }
  return 2.0 * best / q;
}

double exponent_newupper(const RootSystem& roots, const Eigen::VectorXd& rho, ExponentRegion r) {
  require_chamber(roots, rho, "rho");
  require_chamber(roots, roots.alpha(), "alpha");
  const Eigen::VectorXd& a = roots.alpha();
  const double th = gamma_min(roots, RootSubset::Theta, rho) * gamma_bar(roots, RootSubset::Theta, a);
  const double la = gamma_min(roots, RootSubset::Lambda, rho) * gamma_bar(roots, RootSubset::Lambda, a);
  switch (r) {
    case ExponentRegion::Both: return 0.5 * th + 0.5 * la;
    case ExponentRegion::VLarge: return th;
    case ExponentRegion::MLarge: return la;
  }
  return 0.5 * th + 0.5 * la;
}

}  // namespace nak
