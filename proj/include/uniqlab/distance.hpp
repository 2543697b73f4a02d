#pragma once
#include <string>
#include <vector>

#include "uniqlab/coefficients.hpp"
#include "uniqlab/grid.hpp"

namespace uniqlab {

// Shortest-path metric induced by C^{-1}: d(x;y) = sup{psi(x)-psi(y) :
// Gamma(psi) <= 1}, realized as Dijkstra over a lattice stencil with edge
// length sqrt(v^T Cmid^{-1} v), Cmid the average of the endpoint matrices.
// stencil_order w spans primitive offsets with max-norm <= w (w=2 gives the
// 16-neighbor stencil in 2D, the default); eps_stencil is the worst-case
// relative metrication overshoot of that stencil in the Euclidean case.
struct DistanceField {
  std::vector<double> rho;   // per interior node; +inf if unreachable
  int32_t origin_id = -1;
  double eps_stencil = 0;
  int unreachable = 0;
  double max_finite = 0;
};

// throws origin_outside if the configured origin is not an interior node's
// cell, solver-level errors never occur (pure graph search)
DistanceField riemannian_distance(const Grid& grid, const CoefficientField& field,
                                  const std::array<double, 3>& origin, int stencil_order = 2);

double stencil_overshoot(int dim, int stencil_order);

// Compatibility of the computed distance with its defining constraint
// Gamma(rho) <= 1.  Uses the upwind one-sided gradient (the centered one is
// polluted at ridge nodes where shortest paths from two sides meet).
struct GammaCompat {
  double fraction_over = 0;  // share of nodes with Gamma(rho) > 1 + tol
  double q99 = 0;            // 99th percentile of Gamma(rho)
  double max_value = 0;
};
GammaCompat gamma_compatibility(const Grid& grid, const CoefficientField& field,
                                const DistanceField& dist, double tol);

// Volume growth |B(r)| = cell volume x #{rho < r}; a radius is flagged
// truncated when its ball touches a node adjacent to a truncation face,
// meaning the window clips it and the value is only a lower bound.
struct GrowthCurve {
  std::vector<double> r;
  std::vector<double> volume;
  std::vector<uint8_t> truncated;
  int untruncated_count() const;
};
GrowthCurve ball_volume_curve(const Grid& grid, const DistanceField& dist,
                              const std::vector<double>& radii);

// Ball-boundedness evidence on one grid.  Candidates where mass could escape:
// nodes adjacent to a truncation face, and nodes adjacent to the true
// boundary where C degenerates (lambda_min below 0.1 x field median or 1e-8).
// r_star = min rho over candidates; no candidates means balls are bounded
// outright.  The refinement-trace verdict lives in the report module.
struct BallsEvidence {
  bool trivially_bounded = false;  // no candidates at all
  double r_star = 0;               // +inf marker when trivially bounded
  double h = 0;                    // finest spacing of the grid
  int truncation_candidates = 0;
  int degenerate_candidates = 0;
};
BallsEvidence balls_evidence(const Grid& grid, const CoefficientField& field,
                             const DistanceField& dist);

enum class BallsVerdict { bounded, bounded_up_to, suspect_unbounded };
struct BallsReport {
  BallsVerdict verdict = BallsVerdict::bounded;
  double r_star = 0;  // +inf when bounded
  std::vector<BallsEvidence> trace;
  std::string evidence;
};
// aggregate over a refinement ladder (coarse->fine): r* growing without
// saturating => bounded; stable r* => bounded-up-to; stable r* < r_max =>
// suspect-unbounded
BallsReport classify_balls(const std::vector<BallsEvidence>& trace, double r_max);

} // namespace uniqlab
