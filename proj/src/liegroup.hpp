#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace nak {

// Linear forms on R^k are stored as coefficient vectors; a set of forms as the
// rows of a matrix.
enum class RootSubset { Xi, Theta, Lambda };

RootSubset parse_root_subset(const std::string& name);

// Roots of the A-action on m (xi) and v (theta), the drift alpha of the
// vertical Brownian motion, and a witness h0 with every root positive on it.
class RootSystem {
 public:
  RootSystem(Eigen::MatrixXd xi, Eigen::MatrixXd theta, Eigen::VectorXd alpha,
             Eigen::VectorXd h0);

  Eigen::Index rank() const noexcept { return alpha_.size(); }
  Eigen::Index m() const noexcept { return xi_.rows(); }
  Eigen::Index n() const noexcept { return theta_.rows(); }

  const Eigen::MatrixXd& xi() const noexcept { return xi_; }
  const Eigen::MatrixXd& theta() const noexcept { return theta_; }
  const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
  const Eigen::VectorXd& h0() const noexcept { return h0_; }

  // Xi rows followed by Theta rows.
  Eigen::MatrixXd lambda() const;
  Eigen::MatrixXd subset(RootSubset which) const;

  // Every root positive at `a` (interior of the positive chamber).
  bool in_positive_chamber(const Eigen::VectorXd& a) const;

  // Throws divergent-drift naming the first root with lambda(alpha) <= 0.
  void require_alpha_positive() const;

  // Same forms and witness with another drift.
  RootSystem with_alpha(Eigen::VectorXd alpha) const;

 private:
  Eigen::MatrixXd xi_;
  Eigen::MatrixXd theta_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd h0_;
};

// Point of N = M x| V in exponential coordinates (m, v).
struct GroupElement {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
};

// Minimal k with (sum_j v_j ad_j)^{k+1} = 0 for every v. Throws
// degenerate-group when all ad matrices vanish.
int compute_k_o(const std::vector<Eigen::MatrixXd>& ad);

// N = M x| V with M, V abelian. ad[j] is ad_{X_j} restricted to m in the
// Y-basis, strictly lower triangular; the matrices commute since V is abelian.
class MetaAbelianGroup {
 public:
  struct Options {
    // Accept all-zero ad matrices (k_o = 0). Only for degeneration tests.
    bool allow_abelian = false;
  };

  MetaAbelianGroup(RootSystem roots, std::vector<Eigen::MatrixXd> ad)
      : MetaAbelianGroup(std::move(roots), std::move(ad), Options{}) {}
  MetaAbelianGroup(RootSystem roots, std::vector<Eigen::MatrixXd> ad, Options opts);

  Eigen::Index m() const noexcept { return roots_.m(); }
  Eigen::Index n() const noexcept { return roots_.n(); }
  int k_o() const noexcept { return k_o_; }
  const RootSystem& roots() const noexcept { return roots_; }
  const std::vector<Eigen::MatrixXd>& ad() const noexcept { return ad_; }
  bool is_abelian() const noexcept { return k_o_ == 0; }

  // Ad(v)|m = sum_{j <= k_o} (ad_v)^j / j!, exact because ad_v is nilpotent.
  Eigen::MatrixXd adjoint_on_m(const Eigen::VectorXd& v) const;
  // Allocation-free variant for hot loops; `out` must be m x m.
  void adjoint_on_m(const Eigen::VectorXd& v, Eigen::MatrixXd& out,
                    Eigen::MatrixXd& scratch) const;

  GroupElement identity() const;
  // (m1, v1)(m2, v2) = (m1 + Ad(v1) m2, v1 + v2)
  GroupElement multiply(const GroupElement& g1, const GroupElement& g2) const;
  // (m, v)^{-1} = (-Ad(-v) m, -v)
  GroupElement inverse(const GroupElement& g) const;

  // delta^rho_t: m_i -> t^{xi_i(rho)} m_i, v_j -> t^{theta_j(rho)} v_j.
  GroupElement dilate(const Eigen::VectorXd& rho, double t, const GroupElement& g) const;
  // Conjugation by a in A: coordinates scale by e^{lambda(a)}.
  GroupElement conjugate(const Eigen::VectorXd& a, const GroupElement& g) const;

  // |g|_rho = max over coordinates of |c|^{1 / lambda(rho)}.
  double homogeneous_norm(const Eigen::VectorXd& rho, const GroupElement& g) const;

  void check_element(const GroupElement& g) const;

 private:
  RootSystem roots_;
  std::vector<Eigen::MatrixXd> ad_;
  int k_o_ = 0;
};

// Heisenberg group H_n with A = R^k acting through xi1 on x, xi2 on y and
// xi1 + xi2 on z. M = span{Y_1..Y_n, Z}, V = span{X_1..X_n}. Without a
// witness, h0 = xi1/|xi1| + xi2/|xi2|.
MetaAbelianGroup heisenberg_instance(int n, const Eigen::VectorXd& xi1,
                                     const Eigen::VectorXd& xi2,
                                     const Eigen::VectorXd& alpha,
                                     std::optional<Eigen::VectorXd> h0 = std::nullopt,
                                     MetaAbelianGroup::Options opts = {});

// Heisenberg coordinates (x, y, z) <-> (m = (y, z), v = x).
GroupElement heisenberg_point(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double z);

double rho_zero(const RootSystem& roots, const Eigen::VectorXd& a);
double chi(const RootSystem& roots, const Eigen::VectorXd& a);

double gamma_min(const RootSystem& roots, RootSubset subset, const Eigen::VectorXd& a);
double gamma_bar(const RootSystem& roots, RootSubset subset, const Eigen::VectorXd& a);

// ((|m|^{1/k}) / (|m|^{1/k} + 1))^k
double phi_k(const Eigen::VectorXd& m, int k);

}  // namespace nak
