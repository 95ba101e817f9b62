#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "expfun.hpp"
#include "liegroup.hpp"

namespace nak {

enum class ConstantsProvenance { Fitted, Asserted };

struct BoundConstants {
  double C = 1.0;
  double D = 1.0;
  ConstantsProvenance provenance = ConstantsProvenance::Fitted;
};

void validate(const BoundConstants& c);

enum class BoundKind { Ubpsigma, Preest };

BoundKind parse_bound_kind(const std::string& name);
const char* to_string(BoundKind kind) noexcept;

// C (|m|^{1/2k} + 1 + A_{V,S}^{1/2}) exp(-D|v|^2/A_{V,S} - D|m|^{1/k} phi_{2k}(m)/A_{N,S})
// divided by A_{N,P}^{1/2}, k = k_o.
double ubpsigma_rhs(const MetaAbelianGroup& g, const Eigen::VectorXd& m, const Eigen::VectorXd& v,
                    const ExpFunctionalSet& funcs, const BoundConstants& c);

// [C (|m|^{1/2k} + 1) exp(-D|m|^2 / ((|m|^{1/2k} + |v| + 2)^{2k} A_{M,S}))
//  + C A_{V,S}^{1/2} exp(-D (|m|^{1/k} + |v|^2) / A_{V,S})] / (A_{M,P} A_{V,P})^{1/2}
double preest_rhs(const MetaAbelianGroup& g, const Eigen::VectorXd& m, const Eigen::VectorXd& v,
                  const ExpFunctionalSet& funcs, const BoundConstants& c);

double bound_rhs(BoundKind kind, const MetaAbelianGroup& g, const Eigen::VectorXd& m,
                 const Eigen::VectorXd& v, const ExpFunctionalSet& funcs, const BoundConstants& c);

struct BoundSample {
  double kernel = 0.0;
  double std_error = 0.0;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  ExpFunctionalSet funcs;
};

inline constexpr double kFitLogDMin = -20.0;  // log2 of the D grid ends
inline constexpr double kFitLogDMax = 4.0;
inline constexpr int kFitDStepsPerOctave = 4;
inline constexpr double kFitLogCMin = -4.0;   // log2 of the C range
inline constexpr double kFitLogCMax = 40.0;
inline constexpr double kFitCSlack = 1e-12;  // relative

// Which end of the feasible D range fit_constants returns. The smallest D
// gives the smallest C; the largest D tests the Gaussian factor hardest.
enum class FitRule { SmallestD, LargestD };

// Smallest D on the grid 2^{-20}, 2^{-20 + 1/4}, ..., 2^4 for which the
// smallest C making RHS >= kernel on every sample is at most 2^40; that C is
// returned widened by kFitCSlack. With FitRule::LargestD the largest such D is
// used instead.
// Throws fit-failure when no grid D qualifies.
BoundConstants fit_constants(std::span<const BoundSample> samples, const MetaAbelianGroup& g,
                             BoundKind kind, FitRule rule = FitRule::SmallestD);

// Samples with RHS < kernel - slack * std_error.
std::size_t count_violations(std::span<const BoundSample> samples, const MetaAbelianGroup& g,
                             BoundKind kind, const BoundConstants& c, double slack = 3.0);

enum class ExponentRegion { Both, VLarge, MLarge };

ExponentRegion parse_exponent_region(const std::string& name);
const char* to_string(ExponentRegion r) noexcept;

// Which smallness predicate defines the m-part of a region.
enum class RegionPredicate { Norm, Phi };

bool in_region(const MetaAbelianGroup& g, ExponentRegion r, RegionPredicate p,
               const Eigen::VectorXd& m, const Eigen::VectorXd& v, double eps);

struct ThCMExponent {
  double gamma_alpha = 0.0;  // 2 min lambda(alpha) / |lambda|^2 over all roots
  double rho0_rho = 0.0;
};

ThCMExponent exponent_thcm(const RootSystem& roots, const Eigen::VectorXd& rho);

// (1/q) * 2 min lambda(alpha)^2 / |lambda|^2
double exponent_thpota(const RootSystem& roots, double q);

double exponent_newupper(const RootSystem& roots, const Eigen::VectorXd& rho, ExponentRegion r);

}  // namespace nak
