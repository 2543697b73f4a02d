#include "uniqlab/semigroup.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "uniqlab/capacity.hpp"
#include "uniqlab/errors.hpp"
#include "uniqlab/forms.hpp"
#include "uniqlab/lower_order.hpp"

namespace uniqlab {

namespace {

double hmax_used(const Grid& grid) {
  double h = 0;
  for (int k = 0; k < grid.dim; ++k) h = std::max(h, grid.h[k]);
  return h;
}

// upwind advection rows for a nodal drift given by value(id, axis); missing
// upwind neighbors mean extension by zero (dirichlet), so only the diagonal
// survives there
template <class DriftFn>
void add_advection(std::vector<Eigen::Triplet<double>>& trip, const Grid& grid,
                   const Eigen::VectorXd& mass, DriftFn&& value) {
  const int32_t N = grid.interior_count();
  for (int32_t id = 0; id < N; ++id) {
    for (int k = 0; k < grid.dim; ++k) {
      double ck = value(id, k);
      if (ck == 0.0) continue;
      double q = mass[id] * std::abs(ck) / grid.h[static_cast<size_t>(k)];
      int32_t up = grid.neighbor(id, k, ck > 0 ? -1 : +1);
      trip.emplace_back(id, id, q);
      if (up >= 0) trip.emplace_back(id, up, -q);
    }
  }
}

} // namespace

const char* generator_name(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::h_dirichlet: return "H_D";
    case GeneratorKind::h_neumann: return "H_N";
    case GeneratorKind::k_dirichlet: return "K_D";
    case GeneratorKind::k_dirichlet_adjoint: return "K_D_adjoint";
  }
  return "?";
}

Generator assemble_generator(const Grid& grid, const CoefficientField& field,
                             GeneratorKind kind) {
  const bool is_k =
      kind == GeneratorKind::k_dirichlet || kind == GeneratorKind::k_dirichlet_adjoint;
  FormFlavor flavor =
      kind == GeneratorKind::h_neumann ? FormFlavor::neumann : FormFlavor::dirichlet;
  SparseForm base = assemble_form(grid, field, flavor);

  Generator gen;
  gen.kind = kind;
  gen.mass = std::move(base.mass);
  if (!is_k) {
    gen.op = std::move(base.A);
    return gen;
  }

  const int32_t N = grid.interior_count();
  const bool adjoint = kind == GeneratorKind::k_dirichlet_adjoint;
  std::vector<Eigen::Triplet<double>> trip;
  if (field.has_drift) {
    trip.reserve(static_cast<size_t>(N) * grid.dim * 2);
    const double sign = adjoint ? -1.0 : 1.0;
    add_advection(trip, grid, gen.mass,
                  [&](int32_t id, int k) { return sign * field.drift_at(id, k); });
  }
  std::vector<double> divc;
  if (adjoint && field.has_drift) divc = divergence(grid, field);
  if (field.has_zero_order || !divc.empty()) {
    for (int32_t id = 0; id < N; ++id) {
      double z = field.zero_at(id);
      if (!divc.empty()) z -= divc[static_cast<size_t>(id)];
      if (z != 0.0) trip.emplace_back(id, id, gen.mass[id] * z);
    }
  }

  if (trip.empty()) {
    gen.op = std::move(base.A);
  } else {
    Eigen::SparseMatrix<double> extra(N, N);
    extra.setFromTriplets(trip.begin(), trip.end());
    gen.op = base.A + extra;
  }
  if (field.has_drift) {
    LowerOrderBounds b = compute_bounds(grid, field);
    gen.gamma_weight = 1.0 + (std::isinf(b.kappa_max) ? 0.0 : 1.0 / (4.0 * b.kappa_max));
  }
  return gen;
}

const Snapshot& Trajectory::at(double t) const {
  const Snapshot* best = nullptr;
  double bestgap = 0.5 * dt + 1e-12 * std::max(1.0, std::abs(t));
  for (const auto& s : snapshots) {
    double gap = std::abs(s.t - t);
    if (gap <= bestgap) {
      bestgap = gap;
      best = &s;
    }
  }
  if (!best) {
    std::ostringstream os;
    os << "no snapshot within dt/2 of t=" << t << "; request it in snapshot_times";
    fail(ErrorCode::insufficient_data, os.str());
  }
  return *best;
}

Trajectory evolve(const Grid& grid, const Generator& gen, const Eigen::VectorXd& psi0,
                  double horizon, const EvolveOptions& opt) {
  const int32_t N = grid.interior_count();
  if (psi0.size() != N)
    fail(ErrorCode::dimension_mismatch, "initial data does not match the grid");
  if (!(opt.dt > 0)) fail(ErrorCode::bad_parameter, "dt must be positive");
  if (!psi0.allFinite()) fail(ErrorCode::bad_parameter, "initial data must be finite");
  long steps = std::llround(horizon / opt.dt);
  if (steps < 1) fail(ErrorCode::bad_parameter, "horizon shorter than one step");

  Eigen::SparseMatrix<double> M(N, N);
  {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(N));
    for (int32_t i = 0; i < N; ++i) trip.emplace_back(i, i, gen.mass[i]);
    M.setFromTriplets(trip.begin(), trip.end());
  }
  const bool cn = opt.scheme == TimeScheme::crank_nicolson;
  Eigen::SparseMatrix<double> lhs = M + (cn ? 0.5 * opt.dt : opt.dt) * gen.op;
  lhs.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(lhs);
  if (lu.info() != Eigen::Success)
    fail(ErrorCode::solver_failure, "time step factorization failed");

  std::set<long> snap_steps{0, steps};
  for (double ts : opt.snapshot_times) {
    long s = std::llround(ts / opt.dt);
    snap_steps.insert(std::min(std::max(s, 0L), steps));
  }

  const bool track_pos = opt.assert_positivity &&
                         opt.scheme == TimeScheme::implicit_euler && psi0.minCoeff() >= 0.0;
  const double pos_tol = 1e-11 * std::max(1.0, psi0.lpNorm<Eigen::Infinity>());

  Trajectory out;
  out.kind = gen.kind;
  out.scheme = opt.scheme;
  out.dt = opt.dt;
  out.stats.reserve(static_cast<size_t>(steps) + 1);

  Eigen::VectorXd psi = psi0;
  auto record = [&](long step) {
    double t = step * opt.dt;
    Eigen::VectorXd wpsi = gen.mass.cwiseProduct(psi);
    out.stats.push_back(
        {t, wpsi.sum(), std::sqrt(std::max(0.0, wpsi.dot(psi))), psi.lpNorm<Eigen::Infinity>()});
    if (snap_steps.count(step)) out.snapshots.push_back({t, psi});
  };
  record(0);

  for (long s = 1; s <= steps; ++s) {
    Eigen::VectorXd rhs = gen.mass.cwiseProduct(psi);
    if (cn) rhs -= 0.5 * opt.dt * (gen.op * psi);
    psi = lu.solve(rhs);
    if (!psi.allFinite()) fail(ErrorCode::solver_failure, "time step produced non-finite values");
    if (track_pos && psi.minCoeff() < -pos_tol) {
      std::ostringstream os;
      os << "negative value " << psi.minCoeff() << " from nonnegative data at t=" << s * opt.dt
         << "; step or scheme unsuited to this generator";
      fail(ErrorCode::positivity_lost, os.str());
    }
    record(s);
  }
  return out;
}

MassGapResult mass_conservation_gap(const Grid& grid, const CoefficientField& field, double t,
                                    double dt) {
  if (t < 0) fail(ErrorCode::bad_parameter, "time must be nonnegative");
  MassGapResult res;
  res.t = t;
  if (t == 0) return res;
  Eigen::VectorXd one = Eigen::VectorXd::Ones(grid.interior_count());
  EvolveOptions opt;
  opt.dt = dt;
  for (GeneratorKind kind : {GeneratorKind::h_dirichlet, GeneratorKind::h_neumann}) {
    Generator gen = assemble_generator(grid, field, kind);
    Trajectory traj = evolve(grid, gen, one, t, opt);
    double gap = 1.0 - traj.stats.back().mass / traj.stats.front().mass;
    (kind == GeneratorKind::h_dirichlet ? res.gap_dirichlet : res.gap_neumann) = gap;
  }
  return res;
}

double extension_discrepancy(const Grid& grid, const CoefficientField& field,
                             const Eigen::VectorXd& probe, double t, double dt) {
  if (!(t > 0)) fail(ErrorCode::bad_parameter, "time must be positive");
  EvolveOptions opt;
  opt.dt = dt;
  opt.assert_positivity = false;  // probes may change sign
  Generator gd = assemble_generator(grid, field, GeneratorKind::h_dirichlet);
  Generator gn = assemble_generator(grid, field, GeneratorKind::h_neumann);
  Eigen::VectorXd diff = evolve(grid, gd, probe, t, opt).snapshots.back().psi -
                         evolve(grid, gn, probe, t, opt).snapshots.back().psi;
  return std::sqrt(std::max(0.0, diff.dot(gd.mass.cwiseProduct(diff))));
}

std::vector<RefinementSample> mass_gap_trace(const DomainSpec& domain,
                                             const CoefficientSpec& coeffs,
                                             const std::vector<int>& resolutions, double t,
                                             double dt) {
  std::vector<RefinementSample> out;
  out.reserve(resolutions.size());
  for (int res : resolutions) {
    Grid grid = build_grid(domain, res);
    CoefficientField field = sample_coefficients(grid, coeffs);
    out.push_back({grid.h[0], mass_conservation_gap(grid, field, t, dt).gap_dirichlet});
  }
  return out;
}

std::vector<RefinementSample> extension_discrepancy_trace(
    const DomainSpec& domain, const CoefficientSpec& coeffs,
    const std::vector<int>& resolutions, const NodeFn& probe, double t, double dt) {
  if (!probe) fail(ErrorCode::bad_parameter, "probe function required");
  std::vector<RefinementSample> out;
  out.reserve(resolutions.size());
  for (int res : resolutions) {
    Grid grid = build_grid(domain, res);
    CoefficientField field = sample_coefficients(grid, coeffs);
    Eigen::VectorXd p(grid.interior_count());
    for (int32_t id = 0; id < grid.interior_count(); ++id)
      p[id] = probe(grid.coords_of_interior(id));
    out.push_back({grid.h[0], extension_discrepancy(grid, field, p, t, dt)});
  }
  return out;
}

CaccioppoliReport verify_caccioppoli(const Grid& grid, const CoefficientField& field,
                                     const Trajectory& traj, const std::vector<double>& rho,
                                     double r, double delta, double gamma,
                                     const CaccioppoliOptions& opt) {
  const int32_t N = grid.interior_count();
  if (static_cast<int32_t>(rho.size()) != N)
    fail(ErrorCode::dimension_mismatch, "distance field does not match the grid");
  if (!(r > 0) || !(delta > 0) || !(gamma > 0))
    fail(ErrorCode::bad_parameter, "r, delta and gamma must be positive");
  if (traj.snapshots.empty()) fail(ErrorCode::insufficient_data, "trajectory has no snapshots");

  CaccioppoliReport rep;
  rep.r = r;
  rep.delta = delta;
  rep.gamma = gamma;
  rep.nu = opt.nu > 0 ? opt.nu : 1.0 / (8.0 * gamma);
  rep.tau = traj.snapshots.back().t;
  if (rep.tau - delta < -0.5 * traj.dt)
    fail(ErrorCode::bad_parameter, "delta exceeds the trajectory horizon");
  const double s_time = rep.tau + delta;

  // snapshots covering [tau - delta, tau]
  std::vector<const Snapshot*> window;
  for (const auto& snap : traj.snapshots)
    if (snap.t >= rep.tau - delta - 0.5 * traj.dt) window.push_back(&snap);
  if (window.size() < 3 || std::abs(window.front()->t - (rep.tau - delta)) > 0.5 * traj.dt)
    fail(ErrorCode::insufficient_data,
         "snapshots must cover [tau - delta, tau] with at least three samples");

  std::vector<double> rho_r2(static_cast<size_t>(N));
  for (int32_t i = 0; i < N; ++i) {
    double d = rho[static_cast<size_t>(i)];
    if (!std::isfinite(d)) fail(ErrorCode::bad_parameter, "distance field must be finite");
    d = std::max(0.0, d - r);
    rho_r2[static_cast<size_t>(i)] = d * d;
  }
  DistanceField dist;
  dist.rho = rho;
  std::vector<double> eta = radial_cutoff(dist, r, CutoffProfile::theta);
  std::vector<double> g_eta = uniqlab::gamma(grid, field, eta);
  std::vector<double> g_rho2 = uniqlab::gamma(grid, field, rho_r2);

  // weight premise, reduced to its time-independent form (header comment).
  // The slack per node is (h |grad rho|)^2, the squared change of rho across
  // one cell: that is the size of the kink spillover where rho crosses r, and
  // a plain h^2 would be too small exactly when the metric is steep there.
  const double h = hmax_used(grid);
  std::vector<double> slack2(static_cast<size_t>(N));
  for (int32_t i = 0; i < N; ++i) {
    double g2 = 0;
    for (int k = 0; k < grid.dim; ++k) {
      int32_t lo = grid.neighbor(i, k, -1), hi = grid.neighbor(i, k, +1);
      double d = 0;
      if (lo >= 0 && hi >= 0)
        d = (rho[static_cast<size_t>(hi)] - rho[static_cast<size_t>(lo)]) /
            (2.0 * grid.h[static_cast<size_t>(k)]);
      else if (hi >= 0)
        d = (rho[static_cast<size_t>(hi)] - rho[static_cast<size_t>(i)]) /
            grid.h[static_cast<size_t>(k)];
      else if (lo >= 0)
        d = (rho[static_cast<size_t>(i)] - rho[static_cast<size_t>(lo)]) /
            grid.h[static_cast<size_t>(k)];
      g2 += d * d;
    }
    slack2[static_cast<size_t>(i)] = h * h * std::max(1.0, g2);
  }
  rep.premise_worst = -1.0;
  for (int32_t i = 0; i < N; ++i) {
    double excess = (2.0 * gamma * rep.nu * g_rho2[static_cast<size_t>(i)] -
                     rho_r2[static_cast<size_t>(i)]) /
                    (rho_r2[static_cast<size_t>(i)] + slack2[static_cast<size_t>(i)]);
    rep.premise_worst = std::max(rep.premise_worst, excess);
  }
  rep.premise_ok = rep.premise_worst <= opt.eps_allow;

  Eigen::VectorXd w(N);
  for (int32_t i = 0; i < N; ++i) w[i] = grid.node_weight(i);
  auto weighted_norm2 = [&](const Snapshot& snap, const std::vector<double>& mult) {
    double acc = 0;
    double inv = 1.0 / (snap.t - s_time);  // negative on the whole window
    for (int32_t i = 0; i < N; ++i) {
      double e = std::exp(2.0 * rep.nu * rho_r2[static_cast<size_t>(i)] * inv);
      double v = snap.psi[i];
      acc += w[i] * mult[static_cast<size_t>(i)] * e * v * v;
    }
    return acc;
  };

  std::vector<double> eta2(static_cast<size_t>(N));
  for (int32_t i = 0; i < N; ++i)
    eta2[static_cast<size_t>(i)] = eta[static_cast<size_t>(i)] * eta[static_cast<size_t>(i)];

  rep.lhs = weighted_norm2(*window.back(), eta2);
  rep.initial_term = weighted_norm2(*window.front(), eta2);

  double integral = 0;
  double prev_t = window.front()->t;
  double prev_g = weighted_norm2(*window.front(), g_eta);
  for (size_t i = 1; i < window.size(); ++i) {
    double cur_t = window[i]->t;
    double cur_g = weighted_norm2(*window[i], g_eta);
    integral += 0.5 * (cur_t - prev_t) * (prev_g + cur_g);
    prev_t = cur_t;
    prev_g = cur_g;
  }
  rep.gamma_term = 2.0 * gamma * integral;
  rep.rhs = rep.initial_term + rep.gamma_term;
  rep.residual = rep.lhs - rep.rhs;
  rep.allowance =
      opt.tol_cacc * (std::abs(rep.lhs) + std::abs(rep.rhs)) + opt.c_alloc * (hmax_used(grid) + traj.dt);
  rep.pass = rep.residual <= rep.allowance;

  std::ostringstream os;
  os << "premise " << (rep.premise_ok ? "holds" : "FAILS") << " (worst excess "
     << rep.premise_worst << " vs allowed " << opt.eps_allow << "); inequality "
     << (rep.pass ? "holds" : "FAILS") << " (residual " << rep.residual << " vs allowance "
     << rep.allowance << ")";
  rep.note = os.str();
  return rep;
}

} // namespace uniqlab
