#include "uniqlab/capacity.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "uniqlab/errors.hpp"

namespace uniqlab {
namespace {

// cubic ramp 1 -> 0 over [a, b]; max |slope| = 1.5/(b-a)
double ramp_down(double s, double a, double b) {
  if (s <= a) return 1.0;
  if (s >= b) return 0.0;
  const double u = (s - a) / (b - a);
  return 1.0 - u * u * (3.0 - 2.0 * u);
}

std::vector<int32_t> dilate(const Grid& grid, std::vector<int32_t> seed, int cells) {
  std::set<int32_t> seen(seed.begin(), seed.end());
  std::deque<std::pair<int32_t, int>> q;
  for (int32_t id : seed) q.emplace_back(id, 0);
  while (!q.empty()) {
    auto [id, depth] = q.front();
    q.pop_front();
    if (depth == cells) continue;
    for (int axis = 0; axis < grid.dim; ++axis)
      for (int step : {-1, 1}) {
        int32_t nb = grid.neighbor(id, axis, step);
        if (nb >= 0 && seen.insert(nb).second) q.emplace_back(nb, depth + 1);
      }
  }
  return {seen.begin(), seen.end()};
}

// least squares y ~ a + b x
void line_fit(const std::vector<double>& x, const std::vector<double>& y, double& a, double& b) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  b = det != 0 ? (n * sxy - sx * sy) / det : 0.0;
  a = (sy - b * sx) / n;
}

} // namespace

std::string CapacityTarget::describe(int dim) const {
  std::ostringstream os;
  switch (kind) {
    case TargetKind::boundary:
      os << "boundary";
      if (exclude_radius > 0) {
        os << " minus ball(" << exclude_radius << ") at (";
        for (int k = 0; k < dim; ++k) os << (k ? "," : "") << point[static_cast<size_t>(k)];
        os << ")";
      }
      break;
    case TargetKind::face:
      os << "face x" << axis + 1 << (side ? " hi" : " lo");
      break;
    case TargetKind::point:
      os << "point (";
      for (int k = 0; k < dim; ++k) os << (k ? "," : "") << point[static_cast<size_t>(k)];
      os << ")";
      break;
    case TargetKind::node_file:
      os << "node set " << path;
      break;
  }
  return os.str();
}

std::vector<int32_t> target_nodes(const Grid& grid, const CapacityTarget& target, int k) {
  std::vector<int32_t> out;
  switch (target.kind) {
    case TargetKind::boundary: {
      out = grid.boundary_collar(k);
      if (target.exclude_radius > 0) {
        std::vector<int32_t> kept;
        for (int32_t id : out) {
          auto x = grid.coords_of_interior(id);
          double d2 = 0;
          for (int ax = 0; ax < grid.dim; ++ax) {
            const double dx = x[static_cast<size_t>(ax)] - target.point[static_cast<size_t>(ax)];
            d2 += dx * dx;
          }
          if (d2 >= target.exclude_radius * target.exclude_radius) kept.push_back(id);
        }
        out = std::move(kept);
      }
      break;
    }
    case TargetKind::face:
      out = grid.face_collar(target.axis, target.side, k);
      break;
    case TargetKind::point: {
      for (int32_t id = 0; id < grid.interior_count(); ++id) {
        auto x = grid.coords_of_interior(id);
        bool near = true;
        for (int ax = 0; ax < grid.dim; ++ax) {
          const double dx =
              std::fabs(x[static_cast<size_t>(ax)] - target.point[static_cast<size_t>(ax)]);
          if (dx > k * grid.h[static_cast<size_t>(ax)] * (1 + 1e-9)) near = false;
        }
        if (near) out.push_back(id);
      }
      break;
    }
    case TargetKind::node_file: {
      std::ifstream in(target.path);
      if (!in) fail(ErrorCode::io_failure, "cannot open node set " + target.path);
      std::vector<int32_t> seed;
      for (int64_t f = 0; f < grid.node_count(); ++f) {
        int v;
        if (!(in >> v)) fail(ErrorCode::mask_shape_mismatch, "node set too short: " + target.path);
        if (v && grid.interior_id[static_cast<size_t>(f)] >= 0)
          seed.push_back(grid.interior_id[static_cast<size_t>(f)]);
      }
      out = dilate(grid, std::move(seed), k - 1);
      break;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CapacitySolve capacity_solve(const Grid& grid, const SparseForm& neumann,
                             const std::vector<int32_t>& constrained) {
  const int N = grid.interior_count();
  if (constrained.empty()) fail(ErrorCode::empty_collar, "capacity target has no nodes");

  std::vector<char> fixed(static_cast<size_t>(N), 0);
  for (int32_t id : constrained) fixed[static_cast<size_t>(id)] = 1;
  std::vector<int32_t> free_index(static_cast<size_t>(N), -1);
  int nf = 0;
  for (int id = 0; id < N; ++id)
    if (!fixed[static_cast<size_t>(id)]) free_index[static_cast<size_t>(id)] = nf++;

  CapacitySolve out;
  out.psi = Eigen::VectorXd::Ones(N);
  if (nf == 0) {
    // everything constrained: value of the all-ones function
    Eigen::VectorXd K1 = neumann.A * out.psi + neumann.mass.cwiseProduct(out.psi);
    out.value = out.psi.dot(K1);
    return out;
  }

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
  for (int col = 0; col < neumann.A.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(neumann.A, col); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int c = static_cast<int>(it.col());
      if (fixed[static_cast<size_t>(r)]) continue;
      if (fixed[static_cast<size_t>(c)])
        rhs[free_index[static_cast<size_t>(r)]] -= it.value();
      else
        trips.emplace_back(free_index[static_cast<size_t>(r)], free_index[static_cast<size_t>(c)],
                           it.value());
    }
  }
  for (int id = 0; id < N; ++id)
    if (!fixed[static_cast<size_t>(id)]) {
      const int fi = free_index[static_cast<size_t>(id)];
      trips.emplace_back(fi, fi, neumann.mass[id]);
    }

  Eigen::SparseMatrix<double> K(nf, nf);
  K.setFromTriplets(trips.begin(), trips.end());

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::solver_failure, "capacity factorization failed");
  Eigen::VectorXd psi_f = solver.solve(rhs);
  if (solver.info() != Eigen::Success) fail(ErrorCode::solver_failure, "capacity solve failed");

  const double rhs_norm = std::max(rhs.norm(), 1e-300);
  out.residual = (K * psi_f - rhs).norm() / rhs_norm;
  if (out.residual > 1e-8) fail(ErrorCode::solver_failure, "capacity residual too large");

  const double lo = psi_f.minCoeff(), hi = psi_f.maxCoeff();
  if (lo < -1e-9 || hi > 1 + 1e-9)
    fail(ErrorCode::maximum_principle_violated,
         "capacity minimizer left [0,1]: " + std::to_string(lo) + ".." + std::to_string(hi));

  for (int id = 0; id < N; ++id)
    if (!fixed[static_cast<size_t>(id)]) out.psi[id] = psi_f[free_index[static_cast<size_t>(id)]];

  Eigen::VectorXd Kpsi = neumann.A * out.psi + neumann.mass.cwiseProduct(out.psi);
  out.value = out.psi.dot(Kpsi);
  return out;
}

CapacityEstimate classify_capacity(std::vector<CapacitySample> trace, double tol_cap) {
  CapacityEstimate est;
  std::sort(trace.begin(), trace.end(),
            [](const CapacitySample& a, const CapacitySample& b) { return a.s() > b.s(); });
  est.trace = trace;
  if (trace.empty()) fail(ErrorCode::insufficient_data, "empty capacity trace");
  est.value = trace.back().value;

  if (est.value <= 1e-12) {
    est.verdict = CapacityVerdict::zero;
    est.note = "value vanishes outright";
    return est;
  }

  // power fit over the whole (k, h) trace
  std::vector<double> ls, lv;
  for (const auto& t : trace) {
    ls.push_back(std::log(t.s()));
    lv.push_back(std::log(std::max(t.value, 1e-300)));
  }
  double a0 = 0, slope = 0;
  line_fit(ls, lv, a0, slope);
  est.power_exponent = slope;

  if (est.value <= tol_cap && slope >= 0.2) {
    est.verdict = CapacityVerdict::zero;
    est.note = "decays below tol_cap";
    return est;
  }

  // stability of the two finest k = 1 samples
  std::vector<const CapacitySample*> k1;
  for (const auto& t : trace)
    if (t.collar_k == 1) k1.push_back(&t);
  if (k1.size() >= 2) {
    const double v1 = k1[k1.size() - 2]->value, v2 = k1.back()->value;
    const double drift = std::fabs(v1 - v2) / std::max(v2, 1e-300);
    if (est.value > tol_cap && drift <= 0.03) {
      est.verdict = CapacityVerdict::positive;
      est.note = "stable under refinement";
      return est;
    }
  }

  // logarithmic route: 1/V linear in log s with V still falling
  if (trace.size() >= 4) {
    std::vector<double> inv;
    for (const auto& t : trace) inv.push_back(1.0 / std::max(t.value, 1e-300));
    double c0 = 0, c1 = 0;
    line_fit(ls, inv, c0, c1);
    double rms = 0, mean = 0;
    for (size_t i = 0; i < inv.size(); ++i) {
      const double e = inv[i] - (c0 + c1 * ls[i]);
      rms += e * e;
      mean += inv[i];
    }
    rms = std::sqrt(rms / static_cast<double>(inv.size()));
    mean /= static_cast<double>(inv.size());
    const bool falling = est.value <= 0.85 * trace.front().value;
    if (c1 < 0 && rms <= 0.1 * mean && falling) {
      est.verdict = CapacityVerdict::zero;
      est.log_mode = true;
      est.note = "logarithmic decay";
      return est;
    }
  }

  est.verdict = CapacityVerdict::inconclusive;
  est.note = "trace neither stabilizes nor decays cleanly";
  return est;
}

CapacityEstimate boundary_capacity(const DomainSpec& domain, const CoefficientSpec& coeffs,
                                   const std::vector<int>& resolutions,
                                   const CapacityTarget& target, double tol_cap,
                                   CapacityLadder* ladder) {
  std::vector<CapacitySample> trace;
  for (int res : resolutions) {
    auto grid = std::make_shared<Grid>(build_grid(domain, res));
    auto field = std::make_shared<CoefficientField>(sample_coefficients(*grid, coeffs));
    SparseForm fn = assemble_form(*grid, *field, FormFlavor::neumann);
    for (int k : {3, 2, 1}) {
      auto nodes = target_nodes(*grid, target, k);
      CapacitySolve sol = capacity_solve(*grid, fn, nodes);
      trace.push_back({grid->h[0], k, sol.value});
      if (ladder) {
        ladder->grids.push_back(grid);
        ladder->fields.push_back(field);
        ladder->minimizers.push_back(std::move(sol.psi));
        ladder->trace.push_back(trace.back());
      }
    }
  }
  CapacityEstimate est = classify_capacity(std::move(trace), tol_cap);
  est.target = target.describe(domain.dim);
  return est;
}

std::vector<double> mazya_truncation(const std::vector<double>& phi, double lambda) {
  if (lambda <= 0) fail(ErrorCode::negative_input, "truncation level must be positive");
  std::vector<double> out(phi.size());
  for (size_t i = 0; i < phi.size(); ++i) {
    if (phi[i] < 0) fail(ErrorCode::negative_input, "truncation input must be nonnegative");
    out[i] = std::min(phi[i], lambda) / lambda;
  }
  return out;
}

std::vector<double> radial_cutoff(const DistanceField& dist, double r, CutoffProfile profile) {
  if (!(r > 0)) fail(ErrorCode::bad_parameter, "cutoff radius must be positive");
  std::vector<double> out(dist.rho.size());
  for (size_t i = 0; i < out.size(); ++i) {
    const double s = dist.rho[i] / r;
    out[i] = profile == CutoffProfile::theta ? ramp_down(s, 1.5, 2.0) : ramp_down(s, 1.0, 2.0);
  }
  return out;
}

CutoffSequence clamp_sequence(CutoffSequence seq) {
  for (size_t n = 0; n < seq.etas.size(); ++n) {
    const SparseForm f = assemble_form(*seq.grids[n], *seq.fields[n], FormFlavor::neumann);
    const double before = form_value(f, seq.etas[n]);
    for (auto& v : seq.etas[n]) v = std::min(1.0, std::max(0.0, v));
    const double after = form_value(f, seq.etas[n]);
    if (after > before * (1 + 1e-9) + 1e-12)
      fail(ErrorCode::bad_parameter, "clamp increased a form value; assembly bug");
  }
  return seq;
}

CutoffSequence capacity_complement_sequence(
    const CapacityLadder& ladder, std::function<double(const std::array<double, 3>&)> shield) {
  CutoffSequence seq;
  seq.rule = "capacity-complement";
  for (size_t n = 0; n < ladder.minimizers.size(); ++n) {
    const Grid& g = *ladder.grids[n];
    std::vector<double> eta(static_cast<size_t>(g.interior_count()));
    for (int id = 0; id < g.interior_count(); ++id) {
      double v = 1.0 - ladder.minimizers[n][id];
      if (shield) v *= shield(g.coords_of_interior(id));
      eta[static_cast<size_t>(id)] = std::min(1.0, std::max(0.0, v));
    }
    for (int32_t id : g.collar(1)) {
      if (eta[static_cast<size_t>(id)] > 1e-9)
        fail(ErrorCode::bad_parameter,
             "cutoff does not vanish on collar(1); shield the other boundary pieces");
      eta[static_cast<size_t>(id)] = 0.0;
    }
    seq.grids.push_back(ladder.grids[n]);
    seq.fields.push_back(ladder.fields[n]);
    seq.etas.push_back(std::move(eta));
  }
  return seq;
}

CutoffSequence radial_sequence(std::shared_ptr<const Grid> grid,
                               std::shared_ptr<const CoefficientField> field,
                               const DistanceField& dist, const std::vector<double>& radii,
                               CutoffProfile profile) {
  CutoffSequence seq;
  seq.rule = profile == CutoffProfile::theta ? "radial-theta" : "radial-tau";
  for (double r : radii) {
    auto eta = radial_cutoff(dist, r, profile);
    for (int32_t id : grid->collar(1)) eta[static_cast<size_t>(id)] = 0.0;
    seq.grids.push_back(grid);
    seq.fields.push_back(field);
    seq.etas.push_back(std::move(eta));
  }
  return seq;
}

CAProbe probe_one() {
  return [](const Grid& g, const CoefficientField&) {
    return std::vector<double>(static_cast<size_t>(g.interior_count()), 1.0);
  };
}

CAProbe probe_sqrt_gamma(std::function<double(const std::array<double, 3>&)> phi) {
  return [phi = std::move(phi)](const Grid& g, const CoefficientField& f) {
    std::vector<double> values(static_cast<size_t>(g.interior_count()));
    for (int id = 0; id < g.interior_count(); ++id) values[static_cast<size_t>(id)] = phi(g.coords_of_interior(id));
    auto gam = gamma(g, f, values);
    for (auto& v : gam) v = std::sqrt(std::max(0.0, v));
    return gam;
  };
}

CAReport verify_condition_CA(const CutoffSequence& seq,
                             const std::function<bool(const std::array<double, 3>&)>& in_A,
                             const std::vector<CAProbe>& probes) {
  if (seq.etas.empty()) fail(ErrorCode::insufficient_data, "empty cutoff sequence");
  CAReport rep;
  rep.b.resize(probes.size());

  for (size_t n = 0; n < seq.etas.size(); ++n) {
    const Grid& g = *seq.grids[n];
    const CoefficientField& f = *seq.fields[n];
    const auto& eta = seq.etas[n];
    auto gam = gamma(g, f, eta);

    std::vector<char> mem(static_cast<size_t>(g.interior_count()));
    double a = 0;
    for (int id = 0; id < g.interior_count(); ++id) {
      mem[static_cast<size_t>(id)] = in_A(g.coords_of_interior(id)) ? 1 : 0;
      if (mem[static_cast<size_t>(id)]) a += g.node_weight(id) * gam[static_cast<size_t>(id)];
    }
    rep.a.push_back(a);

    for (size_t p = 0; p < probes.size(); ++p) {
      auto values = probes[p](g, f);
      double b2 = 0;
      for (int id = 0; id < g.interior_count(); ++id)
        if (mem[static_cast<size_t>(id)]) {
          const double t = (1.0 - eta[static_cast<size_t>(id)]) * values[static_cast<size_t>(id)];
          b2 += g.node_weight(id) * t * t;
        }
      rep.b[p].push_back(std::sqrt(b2));
    }
  }

  // deep drop, or consistent decay: >= 40% total and >= 10% per rung on
  // average over at least 4 rungs (slow sqrt-like witnesses still count)
  auto decayed = [](const std::vector<double>& v) {
    if (v.back() <= std::max(0.3 * v.front(), 1e-10)) return true;
    if (v.size() >= 4 && v.back() <= 0.6 * v.front()) {
      const double per_rung =
          std::pow(v.back() / v.front(), 1.0 / static_cast<double>(v.size() - 1));
      return per_rung <= 0.9;
    }
    return false;
  };
  auto flat = [](const std::vector<double>& v) {
    return v.front() > 1e-10 && v.back() >= 0.9 * v.front();
  };

  bool all_decay = decayed(rep.a);
  bool any_flat = flat(rep.a);
  for (const auto& b : rep.b) {
    all_decay = all_decay && decayed(b);
    any_flat = any_flat || flat(b);
  }
  if (all_decay) {
    rep.verdict = CAVerdict::satisfied;
    rep.note = "all sequences decay";
  } else if (any_flat) {
    rep.verdict = CAVerdict::failed;
    rep.note = "a sequence refuses to decay";
  } else {
    rep.verdict = CAVerdict::inconclusive;
    rep.note = "partial decay";
  }
  return rep;
}

double ca_brute_force_floor(const Grid& grid, const CoefficientField& field,
                            const std::function<bool(const std::array<double, 3>&)>& in_A) {
  const int N = grid.interior_count();
  const int d = grid.dim;

  // restricted Gamma functional sum_A w Gamma(eta) as a quadratic form
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<char> mem(static_cast<size_t>(N));
  for (int id = 0; id < N; ++id) {
    mem[static_cast<size_t>(id)] = in_A(grid.coords_of_interior(id)) ? 1 : 0;
    if (!mem[static_cast<size_t>(id)]) continue;
    const double w = grid.node_weight(id);
    // nodal gradient outer products, same stencil gamma() uses
    struct Entry { int id; double co; };
    std::vector<Entry> gs[3];
    for (int k = 0; k < d; ++k) {
      const int L = grid.neighbor(id, k, -1);
      const int R = grid.neighbor(id, k, +1);
      const double h = grid.h[static_cast<size_t>(k)];
      if (L >= 0 && R >= 0) {
        gs[k] = {{R, 0.5 / h}, {L, -0.5 / h}};
      } else if (R >= 0) {
        gs[k] = {{R, 1.0 / h}, {id, -1.0 / h}};
      } else if (L >= 0) {
        gs[k] = {{id, 1.0 / h}, {L, -1.0 / h}};
      }
    }
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) {
        const double ckl = field.C_at(id)[pk(d, k, l)];
        if (ckl == 0.0) continue;
        for (const auto& ea : gs[k])
          for (const auto& eb : gs[l]) trips.emplace_back(ea.id, eb.id, w * ckl * ea.co * eb.co);
      }
  }

  std::vector<char> fixed(static_cast<size_t>(N), 0);
  for (int32_t id : grid.collar(1)) fixed[static_cast<size_t>(id)] = 1;
  std::vector<int32_t> fidx(static_cast<size_t>(N), -1);
  int nf = 0;
  for (int id = 0; id < N; ++id)
    if (!fixed[static_cast<size_t>(id)]) fidx[static_cast<size_t>(id)] = nf++;
  if (nf == 0) fail(ErrorCode::empty_interior, "no free nodes inside collar(1)");

  // minimize eta^T (G + D) eta - 2 d^T eta + const, eta = 0 on collar(1)
  Eigen::SparseMatrix<double> G(N, N);
  G.setFromTriplets(trips.begin(), trips.end());
  std::vector<Eigen::Triplet<double>> kt;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
  double constant = 0;
  for (int col = 0; col < G.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(G, col); it; ++it)
      if (!fixed[static_cast<size_t>(it.row())] && !fixed[static_cast<size_t>(it.col())])
        kt.emplace_back(fidx[static_cast<size_t>(it.row())], fidx[static_cast<size_t>(it.col())],
                        it.value());
  for (int id = 0; id < N; ++id) {
    if (!mem[static_cast<size_t>(id)]) continue;
    const double w = grid.node_weight(id);
    constant += w;
    if (fixed[static_cast<size_t>(id)]) continue;
    const int fi = fidx[static_cast<size_t>(id)];
    kt.emplace_back(fi, fi, w);
    rhs[fi] += w;
  }
  // tiny shift keeps the factorization happy where A misses the set entirely
  for (int fi = 0; fi < nf; ++fi) kt.emplace_back(fi, fi, 1e-14);

  Eigen::SparseMatrix<double> K(nf, nf);
  K.setFromTriplets(kt.begin(), kt.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
  if (solver.info() != Eigen::Success) fail(ErrorCode::solver_failure, "floor factorization failed");
  Eigen::VectorXd eta = solver.solve(rhs);
  if (solver.info() != Eigen::Success) fail(ErrorCode::solver_failure, "floor solve failed");

  // value = const - 2 d^T eta + eta^T K eta
  const double v = constant - 2.0 * rhs.dot(eta) + eta.dot(K * eta);
  return std::max(0.0, v);
}

} // namespace uniqlab
