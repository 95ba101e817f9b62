#include "reflect.hpp"

#include <cmath>
#include <numbers>

#include "error.hpp"
#include "randpath.hpp"

namespace nak::reflect {

namespace {

// P(b_t > y)
double tail(double y, double t) { return phi_cdf(-y / std::sqrt(t)); }

double Phi(double z, double t) { return phi_cdf(z / std::sqrt(t)); }

}  // namespace

double prob_hit_then_below(double a, double x, double t) {
  require(a > 0.0, "prob_hit_then_below: barrier must be positive");
  require(t > 0.0, "prob_hit_then_below: horizon must be positive");
  if (x >= a) return 2.0 * tail(a, t) - tail(x, t);
  return tail(2.0 * a - x, t);
}

Region classify(const SupEventQuery& q) {
  require(q.t > 0.0, "SupEventQuery: horizon must be positive");
  require(q.a >= 0.0, "SupEventQuery: barrier must be non-negative");
  require(q.x < q.y, "SupEventQuery: need x < y");
  const double a = q.a, x = q.x, y = q.y;
  if (a == 0.0) return Region::R1;
  if (-a <= x && y <= a) return Region::R1;
  if (y < -a) return Region::R2;
  if (a < x) return Region::R3;
  if (0.0 < x && x < a && a < y) return Region::R4;
  fail(ErrorCode::UnsupportedRegion,
       "bound_abs_sup_interval: window straddles regions; split it at -a, 0 or a");
}

double bound_abs_sup_interval(const SupEventQuery& q) {
  const double a = q.a, x = q.x, y = q.y, t = q.t;
  switch (classify(q)) {
    case Region::R1:
      return 2.0 * Phi(2 * a - x, t) - 2.0 * Phi(2 * a - y, t) +
             2.0 * Phi(2 * a + y, t) - 2.0 * Phi(2 * a + x, t);
    case Region::R2:
      return 2.0 * Phi(2 * a - x, t) - 2.0 * Phi(2 * a - y, t) + Phi(-x, t) -
             Phi(-y, t);
    case Region::R3:
      return Phi(y, t) - Phi(x, t) + 2.0 * Phi(2 * a + y, t) -
             2.0 * Phi(2 * a + x, t);
    case Region::R4:
      // union of {b_t in [a, y]}, {sup b >= a, b_t in [x, a]} and
      // {inf b <= -a, b_t in [x, y]}, written with upper tails
      return 2.0 * tail(a, t) - tail(y, t) - tail(2 * a - x, t) +
             tail(2 * a + x, t) - tail(2 * a + y, t);
  }
  return 0.0;
}

double density_limit_bound(double a, double n, double t) {
  require(t > 0.0, "density_limit_bound: horizon must be positive");
  require(a >= 0.0, "density_limit_bound: barrier must be non-negative");
  const double pref = 2.0 / std::sqrt(std::numbers::pi * t);
  const double an = std::abs(n);
  if (an < a) return pref * std::exp(-(2 * a - an) * (2 * a - an) / (4 * t));
  return pref * std::exp(-n * n / (4 * t));
}

double sup_tail_bound(double x, double y, double t, double c) {
  require(y >= x, "sup_tail_bound: need x <= y");
  require(x >= 0.0, "sup_tail_bound: start must be non-negative");
  require(t > 0.0, "sup_tail_bound: horizon must be positive");
  require(c > 0.0, "sup_tail_bound: constant must be positive");
  return c * std::exp(-(y - x) * (y - x) / (4 * t));
}

}  // namespace nak::reflect
