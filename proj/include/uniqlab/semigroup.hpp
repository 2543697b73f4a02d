#pragma once
#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <string>
#include <vector>

#include "uniqlab/coefficients.hpp"
#include "uniqlab/grid.hpp"

namespace uniqlab {

// Discrete generators and their heat semigroups.  The generator matrix is the
// weak-form operator: phi^T G psi = h_flavor(phi, psi) + sum_x w(x) phi(x)
// (c(x) . grad psi(x) + c0(x) psi(x)), with the advection discretized upwind
// per axis so the off-diagonal entries stay nonpositive and implicit Euler
// inherits the M-matrix positivity argument.  The adjoint flavor replaces
// c -> -c and c0 -> c0 - div c; it matches the transpose exactly on rows whose
// node weights are uniform, i.e. away from the boundary collar.
enum class GeneratorKind { h_dirichlet, h_neumann, k_dirichlet, k_dirichlet_adjoint };
enum class TimeScheme { implicit_euler, crank_nicolson };

const char* generator_name(GeneratorKind kind);

struct Generator {
  GeneratorKind kind = GeneratorKind::h_dirichlet;
  Eigen::SparseMatrix<double> op;
  Eigen::VectorXd mass;
  // energy comparison constant the weighted estimates need: 1 for the
  // symmetric flavors, 1 + (4 kappa_max)^-1 when a drift is present
  double gamma_weight = 1.0;
};

Generator assemble_generator(const Grid& grid, const CoefficientField& field,
                             GeneratorKind kind);

// per-step summary, recorded at t = 0 and after every step:
// mass = <w, psi>, l2 = sqrt(<w, psi^2>), linf = max |psi|
struct StepStat {
  double t = 0, mass = 0, l2 = 0, linf = 0;
};
struct Snapshot {
  double t = 0;
  Eigen::VectorXd psi;
};

struct EvolveOptions {
  double dt = 1e-3;
  TimeScheme scheme = TimeScheme::implicit_euler;
  // snapped to the nearest step boundary; t = 0 and the horizon always kept
  std::vector<double> snapshot_times;
  // implicit euler on nonnegative data must stay nonnegative; a violation
  // beyond roundoff raises positivity_lost (crank-nicolson is exempt, it has
  // no such guarantee and is only here for accuracy studies)
  bool assert_positivity = true;
};

struct Trajectory {
  GeneratorKind kind = GeneratorKind::h_dirichlet;
  TimeScheme scheme = TimeScheme::implicit_euler;
  double dt = 0;
  std::vector<StepStat> stats;
  std::vector<Snapshot> snapshots;
  // snapshot nearest t; throws insufficient_data if none within dt/2
  const Snapshot& at(double t) const;
};

// solves (M + dt G) psi_new = M psi_old (implicit euler) or the midpoint
// variant (crank-nicolson); the horizon is snapped to a whole number of steps.
// throws bad_parameter, dimension_mismatch, solver_failure, positivity_lost
Trajectory evolve(const Grid& grid, const Generator& gen, const Eigen::VectorXd& psi0,
                  double horizon, const EvolveOptions& opt);

// gap(t) = 1 - <w, psi_t> / <w, 1> with psi_0 = 1 exactly.  The neumann gap
// is zero to solver tolerance always; the dirichlet gap is the diagnostic
// (refinement-stable positive gap = distinct sub-markovian extensions).
struct MassGapResult {
  double t = 0;
  double gap_dirichlet = 0;
  double gap_neumann = 0;
};
MassGapResult mass_conservation_gap(const Grid& grid, const CoefficientField& field,
                                    double t, double dt);

// delta(t) = || (S_D(t) - S_N(t)) probe ||_2, the weighted l2 distance of the
// two extensions' evolutions
double extension_discrepancy(const Grid& grid, const CoefficientField& field,
                             const Eigen::VectorXd& probe, double t, double dt);

struct RefinementSample {
  double h = 0;
  double value = 0;
};
using NodeFn = std::function<double(const std::array<double, 3>&)>;

std::vector<RefinementSample> mass_gap_trace(const DomainSpec& domain,
                                             const CoefficientSpec& coeffs,
                                             const std::vector<int>& resolutions, double t,
                                             double dt);
std::vector<RefinementSample> extension_discrepancy_trace(
    const DomainSpec& domain, const CoefficientSpec& coeffs,
    const std::vector<int>& resolutions, const NodeFn& probe, double t, double dt);

// Weighted parabolic energy inequality along a stored trajectory.  With
// tau the final snapshot time, s = tau + delta, xi_t = nu rho_r^2 (t - s)^-1
// for rho_r = dist to the ball {rho <= r}, and eta the radial theta cutoff
// (plateau to 3r/2, support in 2r), checks
//
//   ||eta e^{xi_tau} psi_tau||^2  <=  ||eta e^{xi_{tau-delta}} psi_{tau-delta}||^2
//       + 2 gamma int_{tau-delta}^{tau} <e^{xi_t} psi_t, Gamma(eta) e^{xi_t} psi_t> dt
//
// (trapezoid over the stored snapshots).  The weight has to earn its keep
// first: the generator-side premise xi' + 2 gamma Gamma(xi_t) <= 0 must hold
// nodewise up to discretization headroom.  Since xi_t is a scalar multiple of
// rho_r^2, Gamma(xi_t) = nu^2 (t-s)^-2 Gamma(rho_r^2) and the premise reduces
// to the time-independent check
//
//   2 gamma nu Gamma(rho_r^2)  <=  (1 + eps_allow) rho_r^2
//                                   + eps_allow (h |grad rho|)^2
//
// which at the default nu = (8 gamma)^-1 is exactly "effective Gamma(rho) at
// most 1 + eps_allow"; the per-node slack (h |grad rho|)^2 is the squared
// change of rho across one cell, covering the kink where rho crosses r.  A
// misconfigured nu (too large) fails this by orders of magnitude; that
// detection is the point of reporting premise_ok.
struct CaccioppoliOptions {
  double nu = -1;           // <= 0: use (8 gamma)^-1
  double eps_allow = 0.4;   // premise headroom; covers the centered-difference
                            // overshoot of log-steep distances near degenerate
                            // ends (worst ratio -> ln(3)^2 ~ 1.21, approached
                            // from above at coarse h)
  double tol_cacc = 0.05;   // relative slack on the integrated inequality
  double c_alloc = 1.0;     // absolute allowance scale, times (h + dt); at this
                            // value the euclidean square run sits at residual
                            // -0.33 against allowance 0.04, so the absolute
                            // term only matters when the norms nearly vanish
};

struct CaccioppoliReport {
  double r = 0, delta = 0, tau = 0, gamma = 0, nu = 0;
  double lhs = 0;           // ||eta e^{xi_tau} psi_tau||^2
  double initial_term = 0;  // same norm at tau - delta
  double gamma_term = 0;    // 2 gamma * trapezoid integral
  double rhs = 0;
  double residual = 0;      // lhs - rhs
  double allowance = 0;
  bool premise_ok = false;
  double premise_worst = 0;  // max nodewise normalized excess of the reduced premise
  bool pass = false;         // residual <= allowance (premise reported separately)
  std::string note;
};

// rho: per-interior-node distance from the scenario origin (computed or
// analytic); gamma: the generator's energy comparison constant.
// throws dimension_mismatch, bad_parameter, insufficient_data (the snapshot
// set must cover [tau - delta, tau] with at least three samples)
CaccioppoliReport verify_caccioppoli(const Grid& grid, const CoefficientField& field,
                                     const Trajectory& traj, const std::vector<double>& rho,
                                     double r, double delta, double gamma,
                                     const CaccioppoliOptions& opt = {});

} // namespace uniqlab
