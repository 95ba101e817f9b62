#pragma once

// Reflection-principle probabilities for one-dimensional Brownian motion with
// Var b_t = 2t started at 0. Also used as oracles by the test suites.

namespace nak::reflect {

// Default constant in the two-sided sup tail bound.
inline constexpr double kSupTailConstant = 2.0;

// Exact P(sup_{[0,t]} b >= a and b_t <= x), a > 0.
double prob_hit_then_below(double a, double x, double t);

enum class Region { R1, R2, R3, R4 };

struct SupEventQuery {
  double a = 0.0;  // barrier, >= 0
  double x = 0.0;  // window [x, y], x < y
  double y = 0.0;
  double t = 1.0;  // horizon, > 0
};

// Which of R1..R4 the window falls in. Throws unsupported-region otherwise;
// a = 0 is accepted for any window and reported as R1.
Region classify(const SupEventQuery& q);

// Upper bound on P(sup_{[0,t]} |b| >= a and b_t in [x, y]) for the region the
// query lies in.
double bound_abs_sup_interval(const SupEventQuery& q);

// eps -> 0 limit bound of eps^{-1} P(sup |b| >= a, b_t in [n - eps/2, n + eps/2]).
double density_limit_bound(double a, double n, double t);

// c * exp(-(y - x)^2 / (4t)) bounding P_x(sup_{[0,t]} |b| >= y), 0 <= x <= y.
double sup_tail_bound(double x, double y, double t, double c = kSupTailConstant);

}  // namespace nak::reflect
