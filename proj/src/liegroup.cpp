#include "liegroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "error.hpp"

namespace nak {

namespace {

constexpr double kRootTol = 1e-12;

std::string form_to_string(const Eigen::VectorXd& f) {
  std::ostringstream os;
  os << '(';
  for (Eigen::Index i = 0; i < f.size(); ++i) os << (i ? "," : "") << f(i);
  os << ')';
  return os.str();
}

// Enumerate multisets of size p over n letters as nondecreasing index vectors.
bool next_multiset(std::vector<int>& idx, int n) {
  int i = static_cast<int>(idx.size()) - 1;
  while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - 1) --i;
  if (i < 0) return false;
  const int val = idx[static_cast<std::size_t>(i)] + 1;
  for (std::size_t j = static_cast<std::size_t>(i); j < idx.size(); ++j) idx[j] = val;
  return true;
}

void require_commuting(const std::vector<Eigen::MatrixXd>& ad, double scale) {
  for (std::size_t a = 0; a < ad.size(); ++a)
    for (std::size_t b = a + 1; b < ad.size(); ++b) {
      const double c = (ad[a] * ad[b] - ad[b] * ad[a]).cwiseAbs().maxCoeff();
      require(c <= kRootTol * std::max(1.0, scale * scale),
              "ad matrices must commute (V is abelian)");
    }
}

}  // namespace

RootSubset parse_root_subset(const std::string& name) {
  if (name == "xi" || name == "Xi") return RootSubset::Xi;
  if (name == "theta" || name == "Theta") return RootSubset::Theta;
  if (name == "lambda" || name == "Lambda") return RootSubset::Lambda;
  fail(ErrorCode::InvalidArgument, "unknown root subset '" + name + "'");
}

RootSystem::RootSystem(Eigen::MatrixXd xi, Eigen::MatrixXd theta, Eigen::VectorXd alpha,
                       Eigen::VectorXd h0)
    : xi_(std::move(xi)), theta_(std::move(theta)), alpha_(std::move(alpha)), h0_(std::move(h0)) {
  const Eigen::Index k = alpha_.size();
  require(k >= 1, "RootSystem: rank must be positive");
  require(xi_.rows() >= 1 && theta_.rows() >= 1, "RootSystem: need at least one root in each block");
  require(xi_.cols() == k && theta_.cols() == k && h0_.size() == k,
          "RootSystem: forms, alpha and h0 must share the rank");
  require(alpha_.allFinite() && h0_.allFinite() && xi_.allFinite() && theta_.allFinite(),
          "RootSystem: non-finite input");
  const Eigen::MatrixXd all = lambda();
  for (Eigen::Index r = 0; r < all.rows(); ++r) {
    require(all.row(r).dot(h0_) > 0.0,
            "RootSystem: root " + form_to_string(all.row(r).transpose()) +
                " is not positive on h0 (A+ witness)");
  }
}

Eigen::MatrixXd RootSystem::lambda() const {
  Eigen::MatrixXd all(xi_.rows() + theta_.rows(), rank());
  all << xi_, theta_;
  return all;
}

Eigen::MatrixXd RootSystem::subset(RootSubset which) const {
  switch (which) {
    case RootSubset::Xi: return xi_;
    case RootSubset::Theta: return theta_;
    case RootSubset::Lambda: return lambda();
  }
  return lambda();
}

bool RootSystem::in_positive_chamber(const Eigen::VectorXd& a) const {
  require(a.size() == rank(), "in_positive_chamber: rank mismatch");
  return ((lambda() * a).array() > 0.0).all();
}

void RootSystem::require_alpha_positive() const {
  const Eigen::MatrixXd all = lambda();
  for (Eigen::Index r = 0; r < all.rows(); ++r) {
    const double val = all.row(r).dot(alpha_);
    if (!(val > 0.0)) {
      std::ostringstream os;
      os << "alpha " << form_to_string(alpha_) << " is not in A+: root "
         << form_to_string(all.row(r).transpose()) << " takes value " << val;
      fail(ErrorCode::DivergentDrift, os.str());
    }
  }
}

RootSystem RootSystem::with_alpha(Eigen::VectorXd alpha) const {
  return RootSystem(xi_, theta_, std::move(alpha), h0_);
}

int compute_k_o(const std::vector<Eigen::MatrixXd>& ad) {
  require(!ad.empty(), "compute_k_o: need at least one ad matrix");
  const Eigen::Index m = ad.front().rows();
  double scale = 0.0;
  for (const auto& a : ad) {
    require(a.rows() == m && a.cols() == m, "compute_k_o: ad matrices must be m x m");
    scale = std::max(scale, a.cwiseAbs().maxCoeff());
  }
  if (scale == 0.0)
    fail(ErrorCode::DegenerateGroup, "all ad matrices vanish: N is abelian, k_o would be 0");
  require_commuting(ad, scale);
  // Commuting matrices: (sum v_j ad_j)^p vanishes for all v iff every
  // monomial prod ad_j^{c_j} with |c| = p vanishes.
  const int n = static_cast<int>(ad.size());
  for (int p = 1; p <= m; ++p) {
    std::vector<int> idx(static_cast<std::size_t>(p), 0);
    bool all_zero = true;
    do {
      Eigen::MatrixXd prod = ad[static_cast<std::size_t>(idx[0])];
      for (int i = 1; i < p; ++i) prod = prod * ad[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      if (prod.cwiseAbs().maxCoeff() > kRootTol * std::pow(std::max(1.0, scale), p)) {
        all_zero = false;
        break;
      }
    } while (next_multiset(idx, n));
    if (all_zero) return p - 1;
  }
  fail(ErrorCode::InvalidArgument, "compute_k_o: ad matrices are not nilpotent");
}

MetaAbelianGroup::MetaAbelianGroup(RootSystem roots, std::vector<Eigen::MatrixXd> ad,
                                   Options opts)
    : roots_(std::move(roots)), ad_(std::move(ad)) {
  const Eigen::Index m = roots_.m(), n = roots_.n();
  require(static_cast<Eigen::Index>(ad_.size()) == n,
          "MetaAbelianGroup: need one ad matrix per V basis vector");
  double scale = 0.0;
  for (std::size_t j = 0; j < ad_.size(); ++j) {
    const auto& a = ad_[j];
    require(a.rows() == m && a.cols() == m, "MetaAbelianGroup: ad matrices must be m x m");
    require(a.allFinite(), "MetaAbelianGroup: non-finite ad entry");
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < m; ++c) {
        if (a(r, c) == 0.0) continue;
        require(r > c, "MetaAbelianGroup: ad matrices must be strictly lower triangular");
        const Eigen::VectorXd diff = roots_.xi().row(r) - roots_.xi().row(c) -
                                     roots_.theta().row(static_cast<Eigen::Index>(j));
        require(diff.cwiseAbs().maxCoeff() <= kRootTol,
                "MetaAbelianGroup: ad entry (" + std::to_string(r) + "," + std::to_string(c) +
                    ") of X_" + std::to_string(j) + " incompatible with roots");
      }
    scale = std::max(scale, a.cwiseAbs().maxCoeff());
  }
  if (scale == 0.0 && opts.allow_abelian) {
    k_o_ = 0;
  } else {
    k_o_ = compute_k_o(ad_);
  }
}

Eigen::MatrixXd MetaAbelianGroup::adjoint_on_m(const Eigen::VectorXd& v) const {
  Eigen::MatrixXd out(m(), m()), scratch(m(), m());
  adjoint_on_m(v, out, scratch);
  return out;
}

void MetaAbelianGroup::adjoint_on_m(const Eigen::VectorXd& v, Eigen::MatrixXd& out,
                                    Eigen::MatrixXd& scratch) const {
  require(v.size() == n(), "adjoint_on_m: dimension mismatch");
  out.setIdentity(m(), m());
  if (k_o_ == 0) return;
  scratch.setZero(m(), m());
  for (Eigen::Index j = 0; j < n(); ++j)
    if (v(j) != 0.0) scratch.noalias() += v(j) * ad_[static_cast<std::size_t>(j)];
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(m(), m());
  for (int p = 1; p <= k_o_; ++p) {
    term = (term * scratch / static_cast<double>(p)).eval();
    out += term;
  }
}

GroupElement MetaAbelianGroup::identity() const {
  return {Eigen::VectorXd::Zero(m()), Eigen::VectorXd::Zero(n())};
}

void MetaAbelianGroup::check_element(const GroupElement& g) const {
  require(g.m.size() == m() && g.v.size() == n(), "group element: dimension mismatch");
}

GroupElement MetaAbelianGroup::multiply(const GroupElement& g1, const GroupElement& g2) const {
  check_element(g1);
  check_element(g2);
  return {g1.m + adjoint_on_m(g1.v) * g2.m, g1.v + g2.v};
}

GroupElement MetaAbelianGroup::inverse(const GroupElement& g) const {
  check_element(g);
  return {-(adjoint_on_m(-g.v) * g.m), -g.v};
}

GroupElement MetaAbelianGroup::dilate(const Eigen::VectorXd& rho, double t,
                                      const GroupElement& g) const {
  require(t > 0.0, "dilate: t must be positive");
  require(rho.size() == roots_.rank(), "dilate: rho has wrong rank");
  check_element(g);
  return conjugate(std::log(t) * rho, g);
}

GroupElement MetaAbelianGroup::conjugate(const Eigen::VectorXd& a, const GroupElement& g) const {
  require(a.size() == roots_.rank(), "conjugate: a has wrong rank");
  check_element(g);
  const Eigen::ArrayXd sm = (roots_.xi() * a).array().exp();
  const Eigen::ArrayXd sv = (roots_.theta() * a).array().exp();
  return {(g.m.array() * sm).matrix(), (g.v.array() * sv).matrix()};
}

double MetaAbelianGroup::homogeneous_norm(const Eigen::VectorXd& rho,
                                          const GroupElement& g) const {
  require(rho.size() == roots_.rank(), "homogeneous_norm: rho has wrong rank");
  check_element(g);
  const Eigen::VectorXd lm = roots_.xi() * rho;
  const Eigen::VectorXd lv = roots_.theta() * rho;
  require((lm.array() > 0.0).all() && (lv.array() > 0.0).all(),
          "homogeneous_norm: every root must be positive on rho");
  double r = 0.0;
  for (Eigen::Index i = 0; i < m(); ++i) r = std::max(r, std::pow(std::abs(g.m(i)), 1.0 / lm(i)));
  for (Eigen::Index j = 0; j < n(); ++j) r = std::max(r, std::pow(std::abs(g.v(j)), 1.0 / lv(j)));
  return r;
}

MetaAbelianGroup heisenberg_instance(int n, const Eigen::VectorXd& xi1,
                                     const Eigen::VectorXd& xi2, const Eigen::VectorXd& alpha,
                                     std::optional<Eigen::VectorXd> h0,
                                     MetaAbelianGroup::Options opts) {
  require(n >= 1, "heisenberg_instance: n must be positive");
  const Eigen::Index k = xi1.size();
  require(k >= 1 && xi2.size() == k && alpha.size() == k,
          "heisenberg_instance: forms and alpha must share the rank");
  if (!h0) {
    require(xi1.norm() > 0.0 && xi2.norm() > 0.0, "heisenberg_instance: zero root");
    h0 = xi1 / xi1.norm() + xi2 / xi2.norm();
  }
  const Eigen::Index m = n + 1;
  Eigen::MatrixXd xi(m, k), theta(n, k);
  for (Eigen::Index j = 0; j < n; ++j) {
    xi.row(j) = xi2.transpose();
    theta.row(j) = xi1.transpose();
  }
  xi.row(n) = (xi1 + xi2).transpose();
  std::vector<Eigen::MatrixXd> ad(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(m, m));
  if (!opts.allow_abelian) {
    for (Eigen::Index j = 0; j < n; ++j) ad[static_cast<std::size_t>(j)](n, j) = 1.0;
  }
  return MetaAbelianGroup(RootSystem(std::move(xi), std::move(theta), alpha, *h0),
                          std::move(ad), opts);
}

GroupElement heisenberg_point(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double z) {
  require(x.size() == y.size() && x.size() >= 1, "heisenberg_point: dimension mismatch");
  Eigen::VectorXd m(y.size() + 1);
  m << y, z;
  return {m, x};
}

double rho_zero(const RootSystem& roots, const Eigen::VectorXd& a) {
  require(a.size() == roots.rank(), "rho_zero: rank mismatch");
  return (roots.xi() * a).sum() + (roots.theta() * a).sum();
}

double chi(const RootSystem& roots, const Eigen::VectorXd& a) {
  return std::exp(rho_zero(roots, a));
}

double gamma_min(const RootSystem& roots, RootSubset subset, const Eigen::VectorXd& a) {
  require(a.size() == roots.rank(), "gamma_min: rank mismatch");
  const Eigen::MatrixXd f = roots.subset(subset);
  require(f.rows() >= 1, "gamma_min: empty subset");
  return (f * a).minCoeff();
}

double gamma_bar(const RootSystem& roots, RootSubset subset, const Eigen::VectorXd& a) {
  require(a.size() == roots.rank(), "gamma_bar: rank mismatch");
  const Eigen::MatrixXd f = roots.subset(subset);
  require(f.rows() >= 1, "gamma_bar: empty subset");
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < f.rows(); ++r) {
    const double n2 = f.row(r).squaredNorm();
    require(n2 > 0.0, "gamma_bar: zero root");
    best = std::min(best, f.row(r).dot(a) / n2);
  }
  return best;
}

double phi_k(const Eigen::VectorXd& m, int k) {
  require(k >= 1, "phi_k: k must be positive");
  const double r = std::pow(m.norm(), 1.0 / k);
  if (std::isinf(r)) return 1.0;
  return std::pow(r / (r + 1.0), k);
}

}  // namespace nak
