#pragma once
#include <vector>

#include "uniqlab/coefficients.hpp"
#include "uniqlab/grid.hpp"

namespace uniqlab {

// Constants the drift and zero-order terms feed into the semigroup bounds:
// omega0 = min c0, omega1 = max div c (centered differences, one-sided at
// mask edges), kappa_max = the largest kappa with C(x) >= kappa c(x)c(x)^T
// everywhere, omega = omega0 - omega1/2.  Grid min/max stand in for the
// essential bounds; on truncated windows they only certify the window.
struct LowerOrderBounds {
  double omega0 = 0;
  double omega1 = 0;
  double kappa_max = 0;  // +infinity when c == 0
  double omega = 0;
  int32_t kappa_argmin = -1;  // node attaining kappa_max, -1 if c == 0
  bool c0_lower = true;       // the three flags of the standing conditions
  bool divc_upper = true;
  bool matrix_order = true;   // kappa_max > 0
  bool window_limited = false;
};

LowerOrderBounds compute_bounds(const Grid& grid, const CoefficientField& field);

// smallest shift making the perturbed form sectorial: max(0, (4 kappa)^-1 - omega).
// throws kappa_zero when the matrix-order condition fails outright
double accretivity_shift(const LowerOrderBounds& bounds);

// sum_x w(x) (c(x)^T g(x))^2 with the same centered/one-sided gradient the
// forms use; Cauchy-Schwarz against C(x) bounds it by kappa_max^-1 times the
// form value, exactly, nodewise
double drift_energy(const Grid& grid, const CoefficientField& field,
                    const std::vector<double>& phi);

// nodal div c, exposed for the adjoint-generator assembly
std::vector<double> divergence(const Grid& grid, const CoefficientField& field);

} // namespace uniqlab
