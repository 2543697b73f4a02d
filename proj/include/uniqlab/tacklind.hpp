#pragma once
#include <string>

#include "uniqlab/distance.hpp"
#include "uniqlab/expr.hpp"

namespace uniqlab {

// Volume-growth admissibility: the uniqueness machinery needs the integral
// of r / log|B(r)| over large r to diverge.  Growth up to a*exp(b r^2
// log(1+r)) qualifies; faster growth, e.g. any power r^(2+eps) in the log,
// does not.
enum class TacklindVerdict { satisfied, violated, inconclusive };

struct TacklindReport {
  TacklindVerdict verdict = TacklindVerdict::inconclusive;
  std::string mode;      // "analytic" or "empirical"
  std::string evidence;  // which rule fired and its numbers
  // empirical fit of log|B(r)| ~ beta * r^p * log(1+r)^q (when performed)
  double beta = 0, p = 0, q = 0, residual = 0;
  bool fitted = false;
};

// g = analytic law for log|B(r)| as an expression in r, classified on a
// dyadic ladder: bounded ratio against r^2 log(1+r) => satisfied; local
// exponent persistently >= 2.05 => violated; otherwise the dyadic increments
// of the partial sums of r/g(r) decide by their decay exponent.
TacklindReport tacklind_analytic(const Expr& g);
TacklindReport tacklind_analytic(const std::string& g_text);

// empirical volume curve from ball_volume_curve; truncated radii are
// excluded.  throws Error(insufficient_data) when fewer than 8 usable radii
// remain.  Saturating curves (bounded volume) are satisfied outright;
// otherwise the fitted law is classified like the analytic case.
TacklindReport tacklind_empirical(const GrowthCurve& curve);

} // namespace uniqlab
