#include "uniqlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "uniqlab/errors.hpp"
#include "uniqlab/forms.hpp"

namespace uniqlab {

namespace {

using njson = nlohmann::ordered_json;
constexpr double inf = std::numeric_limits<double>::infinity();

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

// +-inf and nan are not json numbers; they round-trip as strings
njson jnum(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double jget(const njson& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return inf;
    if (s == "-inf") return -inf;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    fail(ErrorCode::io_failure, "not a number: '" + s + "'");
  }
  return j.get<double>();
}

const char* balls_name(BallsVerdict v) {
  switch (v) {
    case BallsVerdict::bounded: return "bounded";
    case BallsVerdict::bounded_up_to: return "bounded-up-to";
    default: return "suspect-unbounded";
  }
}
BallsVerdict balls_from(const std::string& s) {
  if (s == "bounded") return BallsVerdict::bounded;
  if (s == "bounded-up-to") return BallsVerdict::bounded_up_to;
  if (s == "suspect-unbounded") return BallsVerdict::suspect_unbounded;
  fail(ErrorCode::io_failure, "unknown balls verdict '" + s + "'");
}

const char* tack_name(TacklindVerdict v) {
  switch (v) {
    case TacklindVerdict::satisfied: return "satisfied";
    case TacklindVerdict::violated: return "violated";
    default: return "inconclusive";
  }
}
TacklindVerdict tack_from(const std::string& s) {
  if (s == "satisfied") return TacklindVerdict::satisfied;
  if (s == "violated") return TacklindVerdict::violated;
  if (s == "inconclusive") return TacklindVerdict::inconclusive;
  fail(ErrorCode::io_failure, "unknown tacklind verdict '" + s + "'");
}

const char* cap_name(CapacityVerdict v) {
  switch (v) {
    case CapacityVerdict::zero: return "zero";
    case CapacityVerdict::positive: return "positive";
    default: return "inconclusive";
  }
}
CapacityVerdict cap_from(const std::string& s) {
  if (s == "zero") return CapacityVerdict::zero;
  if (s == "positive") return CapacityVerdict::positive;
  if (s == "inconclusive") return CapacityVerdict::inconclusive;
  fail(ErrorCode::io_failure, "unknown capacity verdict '" + s + "'");
}

const char* ca_name(CAVerdict v) {
  switch (v) {
    case CAVerdict::satisfied: return "satisfied";
    case CAVerdict::failed: return "failed";
    default: return "inconclusive";
  }
}
CAVerdict ca_from(const std::string& s) {
  if (s == "satisfied") return CAVerdict::satisfied;
  if (s == "failed") return CAVerdict::failed;
  if (s == "inconclusive") return CAVerdict::inconclusive;
  fail(ErrorCode::io_failure, "unknown C_A verdict '" + s + "'");
}

Verdict verdict_from(const std::string& s) {
  if (s == "certified") return Verdict::certified;
  if (s == "refuted") return Verdict::refuted;
  if (s == "inconclusive") return Verdict::inconclusive;
  fail(ErrorCode::io_failure, "unknown verdict '" + s + "'");
}

// refinement-trace reading shared by the mass gap and the floor route:
// a deep drop or consistent geometric decay closes the witness, a value
// that refuses to move below 90% of its start is a stable positive one
bool trace_vanishes(const std::vector<double>& v, double abs_floor) {
  if (v.back() <= std::max(0.3 * v.front(), abs_floor)) return true;
  if (v.size() >= 3 && v.back() <= 0.05 && v.front() > 0) {
    const double per_rung =
        std::pow(v.back() / v.front(), 1.0 / static_cast<double>(v.size() - 1));
    return per_rung <= 0.8;
  }
  return false;
}
bool trace_stable_positive(const std::vector<double>& v, double level) {
  return v.front() > level && v.back() >= 0.9 * v.front();
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

} // namespace

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::certified: return "certified";
    case Verdict::refuted: return "refuted";
    default: return "inconclusive";
  }
}

UniquenessReport certify(const Scenario& sc) {
  if (sc.problem.grid.resolutions.size() < 2)
    fail(ErrorCode::bad_parameter, "refinement verdicts need at least two resolutions");

  UniquenessReport rep;
  rep.scenario = sc.name;
  const DomainSpec& dom = sc.problem.domain;
  rep.dim = dom.dim;
  rep.resolutions = sc.problem.grid.resolutions;
  rep.stencil_order = sc.problem.grid.stencil_order;
  rep.truncated = dom.has_truncation();

  // shared ladder; a config that cannot even build a grid has nothing to
  // report against and the error propagates to the caller
  std::vector<std::shared_ptr<const Grid>> grids;
  std::vector<std::shared_ptr<const CoefficientField>> fields;
  for (int res : rep.resolutions) {
    auto g = std::make_shared<Grid>(build_grid(dom, res));
    fields.push_back(std::make_shared<CoefficientField>(sample_coefficients(*g, sc.problem.coefficients)));
    rep.spacings.push_back(*std::min_element(g->h.begin(), g->h.begin() + rep.dim));
    grids.push_back(std::move(g));
  }

  // ---- metric geometry: distance ladder, ball verdict, volume growth
  std::vector<DistanceField> dists;
  std::string dist_err;
  try {
    for (size_t i = 0; i < grids.size(); ++i)
      dists.push_back(riemannian_distance(*grids[i], *fields[i], dom.origin, rep.stencil_order));
  } catch (const Error& e) {
    dist_err = e.what();
    dists.clear();
  }

  if (dist_err.empty()) {
    try {
      std::vector<BallsEvidence> ev;
      for (size_t i = 0; i < grids.size(); ++i)
        ev.push_back(balls_evidence(*grids[i], *fields[i], dists[i]));
      double rmax = sc.r_max > 0 ? sc.r_max : 2.0 * std::max(dists.back().max_finite, 0.5);
      rep.balls.report = classify_balls(ev, rmax);
      if (!rep.truncated && rep.balls.report.verdict != BallsVerdict::bounded) {
        // without truncation faces the domain is a bounded set and so is
        // every ball in it; finite r* only locates a degenerate wall
        std::string wall = fmt(rep.balls.report.r_star);
        rep.balls.report.verdict = BallsVerdict::bounded;
        rep.balls.report.r_star = inf;
        rep.balls.report.evidence =
            "bounded domain without truncation faces, balls are bounded outright"
            " (degenerate wall at finite distance " +
            wall + ")";
      }
      rep.balls.ran = true;
      rep.balls.note = rep.balls.report.evidence;
    } catch (const Error& e) {
      rep.balls.note = e.what();
    }

    try {
      const DistanceField& fine = dists.back();
      if (!(fine.max_finite > 0))
        fail(ErrorCode::insufficient_data, "no finite distances to grow balls over");
      std::vector<double> radii;
      for (int j = 1; j <= sc.growth_radii; ++j)
        radii.push_back(sc.radii_top * fine.max_finite * j / sc.growth_radii);
      rep.tacklind.curve = ball_volume_curve(*grids.back(), fine, radii);
      rep.tacklind.report = tacklind_empirical(rep.tacklind.curve);
      rep.tacklind.ran = true;
      rep.tacklind.note = rep.tacklind.report.evidence;
      if (rep.truncated) rep.tacklind.note += "; window-limited";
    } catch (const Error& e) {
      rep.tacklind.note = e.what();
    }
  } else {
    rep.balls.note = "distance field unavailable: " + dist_err;
    rep.tacklind.note = "distance field unavailable: " + dist_err;
  }

  // ---- capacity, one estimate per target; the first target's minimizer
  // ladder feeds the cutoff route below
  CapacityLadder ladder;
  bool ladder_ok = false;
  for (size_t ti = 0; ti < sc.targets.size(); ++ti) {
    try {
      auto est = boundary_capacity(dom, sc.problem.coefficients, rep.resolutions, sc.targets[ti],
                                   sc.tol_cap, ti == 0 ? &ladder : nullptr);
      if (ti == 0) ladder_ok = true;
      rep.capacity.push_back(std::move(est));
    } catch (const Error& e) {
      CapacityEstimate est;
      est.target = sc.targets[ti].describe(dom.dim);
      est.verdict = CapacityVerdict::inconclusive;
      est.note = e.what();
      rep.capacity.push_back(std::move(est));
    }
  }

  CapacityVerdict capv = CapacityVerdict::inconclusive;
  if (!rep.capacity.empty()) {
    bool piece_positive = false;
    for (size_t ti = 1; ti < rep.capacity.size(); ++ti)
      piece_positive |= rep.capacity[ti].verdict == CapacityVerdict::positive;
    if (rep.capacity[0].verdict == CapacityVerdict::zero && piece_positive) {
      rep.flags.push_back(
          "RefinementInconsistency: a boundary piece classifies positive under a zero total");
      capv = CapacityVerdict::inconclusive;
    } else if (rep.capacity[0].verdict == CapacityVerdict::positive || piece_positive) {
      capv = CapacityVerdict::positive;
    } else {
      capv = rep.capacity[0].verdict;
    }
  }

  // ---- condition C_A; which route makes sense depends on the capacity side
  if (rep.truncated) {
    rep.ca.route = "skipped";
    rep.ca.note = "window-limited: admissible cutoffs may live beyond the window";
  } else if (capv == CapacityVerdict::zero && ladder_ok) {
    try {
      auto seq = clamp_sequence(capacity_complement_sequence(ladder));
      auto ca = verify_condition_CA(
          seq, [](const std::array<double, 3>&) { return true; }, {probe_one()});
      rep.ca.ran = true;
      rep.ca.verdict = ca.verdict;
      rep.ca.route = "capacity-complement";
      rep.ca.a = ca.a;
      rep.ca.b = ca.b;
      rep.ca.note = ca.note;
    } catch (const Error& e) {
      rep.ca.route = "capacity-complement";
      rep.ca.note = e.what();
    }
  } else if (capv == CapacityVerdict::positive) {
    try {
      for (size_t i = 0; i < grids.size(); ++i)
        rep.ca.floors.push_back(ca_brute_force_floor(
            *grids[i], *fields[i], [](const std::array<double, 3>&) { return true; }));
      rep.ca.ran = true;
      rep.ca.route = "discrete-floor";
      if (trace_stable_positive(rep.ca.floors, 0.05)) {
        rep.ca.verdict = CAVerdict::failed;
        rep.ca.note = "exact floor stays at " + fmt(rep.ca.floors.back()) +
                      ", every admissible sequence is obstructed";
      } else if (trace_vanishes(rep.ca.floors, 1e-10)) {
        rep.ca.verdict = CAVerdict::satisfied;
        rep.ca.note = "exact floor collapses under refinement, its minimizers are a witness";
      } else {
        rep.ca.verdict = CAVerdict::inconclusive;
        rep.ca.note = "floor trace " + fmt(rep.ca.floors.front()) + " -> " +
                      fmt(rep.ca.floors.back()) + " settles nothing";
      }
    } catch (const Error& e) {
      rep.ca.route = "discrete-floor";
      rep.ca.note = e.what();
    }
  } else {
    rep.ca.route = "skipped";
    rep.ca.note = "no capacity verdict to pair with";
  }

  // ---- mass gap under refinement (third witness); Dirichlet windows leak
  // through truncation faces, so the witness only exists on true domains
  if (rep.truncated) {
    rep.gap.note = "window-limited: the window edge absorbs mass, not run";
  } else {
    try {
      rep.gap.trace = mass_gap_trace(dom, sc.problem.coefficients, rep.resolutions, sc.horizon, sc.dt);
      rep.gap.ran = true;
      std::vector<double> v;
      for (auto& s : rep.gap.trace) v.push_back(std::max(0.0, s.value));
      if (trace_vanishes(v, 1e-3)) {
        rep.gap.reading = Verdict::certified;
        rep.gap.note = "gap " + fmt(v.front()) + " -> " + fmt(v.back()) + " closes under refinement";
      } else if (trace_stable_positive(v, 0.05)) {
        rep.gap.reading = Verdict::refuted;
        rep.gap.note = "gap stable near " + fmt(v.back()) + " at t = " + fmt(sc.horizon);
      } else {
        rep.gap.reading = Verdict::inconclusive;
        rep.gap.note = "gap " + fmt(v.front()) + " -> " + fmt(v.back()) + " settles nothing";
      }
    } catch (const Error& e) {
      rep.gap.note = e.what();
    }
  }

  // ---- lower-order constants on the finest grid
  try {
    rep.lower.bounds = compute_bounds(*grids.back(), *fields.back());
    rep.lower.identical_to_h = !fields.back()->has_drift() && !fields.back()->has_zero_order();
    rep.lower.ran = true;
    try {
      rep.lower.sigma_min = accretivity_shift(rep.lower.bounds);
      rep.lower.shift_defined = true;
    } catch (const Error& e) {
      rep.lower.sigma_min = inf;
      rep.lower.note = e.what();
    }
    if (rep.lower.note.empty())
      rep.lower.note = rep.lower.identical_to_h ? "no lower-order terms, K coincides with H"
                                                : "standing conditions evaluated nodewise";
    if (rep.lower.bounds.window_limited) rep.lower.note += "; window-limited";
  } catch (const Error& e) {
    rep.lower.note = e.what();
  }

  // ---- cross-checks: the capacity, cutoff and mass-gap criteria are
  // equivalent characterizations, definitive disagreement is flagged and
  // blocks any verdict rather than being resolved silently
  const bool cap_zero = capv == CapacityVerdict::zero;
  const bool cap_pos = capv == CapacityVerdict::positive;
  const bool ca_sat = rep.ca.ran && rep.ca.verdict == CAVerdict::satisfied;
  const bool ca_fail = rep.ca.ran && rep.ca.verdict == CAVerdict::failed;
  const bool gap_closed = rep.gap.ran && rep.gap.reading == Verdict::certified;
  const bool gap_open = rep.gap.ran && rep.gap.reading == Verdict::refuted;
  if (cap_zero && ca_fail)
    rep.flags.push_back("WitnessDisagreement: capacity zero but condition C_A obstructed");
  if (cap_pos && ca_sat)
    rep.flags.push_back("WitnessDisagreement: capacity positive but condition C_A satisfied");
  if (cap_zero && gap_open)
    rep.flags.push_back("WitnessDisagreement: capacity zero but the mass gap stays open");
  if (cap_pos && gap_closed)
    rep.flags.push_back("WitnessDisagreement: capacity positive but the mass gap closes");
  if (ca_sat && gap_open)
    rep.flags.push_back("WitnessDisagreement: condition C_A satisfied but the mass gap stays open");
  if (ca_fail && gap_closed)
    rep.flags.push_back("WitnessDisagreement: condition C_A obstructed but the mass gap closes");
  bool disagreement = false;
  for (const auto& f : rep.flags) disagreement |= f.rfind("WitnessDisagreement", 0) == 0;

  // ---- conclusions
  rep.markov.consumed = {"capacity", "condition-ca", "mass-gap"};
  if (disagreement) {
    rep.markov.verdict = Verdict::inconclusive;
    rep.markov.reason = "witnesses disagree, see flags";
  } else if (cap_zero && ca_sat && gap_closed) {
    rep.markov.verdict = Verdict::certified;
    rep.markov.reason =
        "capacity vanishes, condition-ca holds and the mass-gap closes, three witnesses agree";
  } else if (cap_pos || gap_open) {
    rep.markov.verdict = Verdict::refuted;
    std::vector<std::string> why;
    if (cap_pos) why.push_back("stable positive capacity");
    if (gap_open) why.push_back("refinement-stable mass-gap");
    rep.markov.reason = join(why, " and ");
  } else {
    rep.markov.verdict = Verdict::inconclusive;
    std::vector<std::string> open;
    if (!cap_zero && !cap_pos) open.push_back("capacity");
    if (!ca_sat && !ca_fail) open.push_back("condition-ca");
    if (!gap_closed && !gap_open) open.push_back("mass-gap");
    rep.markov.reason = "open witnesses: " + join(open, ", ");
  }

  const bool balls_ok = rep.balls.ran && rep.balls.report.verdict == BallsVerdict::bounded;
  const bool tack_ok = rep.tacklind.ran && rep.tacklind.report.verdict == TacklindVerdict::satisfied;
  rep.l1_h.consumed = {"balls", "tacklind", "capacity", "condition-ca", "mass-gap"};
  if (rep.markov.verdict == Verdict::refuted) {
    // L1 uniqueness implies Markov uniqueness, so a refuted Markov verdict
    // carries over; the growth hypotheses play no role in that direction
    rep.l1_h.verdict = Verdict::refuted;
    rep.l1_h.reason = "markov uniqueness is refuted (" + rep.markov.reason +
                      ") and L1 uniqueness would imply it";
  } else if (balls_ok && tack_ok && rep.markov.verdict == Verdict::certified) {
    rep.l1_h.verdict = Verdict::certified;
    rep.l1_h.reason = "balls bounded, tacklind growth admissible, all markov witnesses certified";
  } else {
    rep.l1_h.verdict = Verdict::inconclusive;
    std::vector<std::string> blockers;
    if (!balls_ok)
      blockers.push_back(std::string("balls ") +
                         (rep.balls.ran ? balls_name(rep.balls.report.verdict) : "not computed"));
    if (!tack_ok) {
      if (rep.tacklind.ran && rep.tacklind.report.verdict == TacklindVerdict::violated)
        blockers.push_back("tacklind violated (a sufficient condition fails, nothing is refuted)");
      else
        blockers.push_back("tacklind open");
    }
    if (rep.markov.verdict != Verdict::certified) blockers.push_back("markov witnesses open");
    rep.l1_h.reason = "blocked: " + join(blockers, "; ");
  }

  rep.l1_k.consumed = {"balls", "tacklind", "capacity", "condition-ca", "mass-gap", "lower-order"};
  if (rep.lower.ran && rep.lower.identical_to_h) {
    rep.l1_k.verdict = rep.l1_h.verdict;
    rep.l1_k.reason = "no lower-order terms, K coincides with H";
  } else {
    const bool flags_ok = rep.lower.ran && rep.lower.bounds.c0_lower &&
                          rep.lower.bounds.divc_upper && rep.lower.bounds.matrix_order &&
                          !rep.lower.bounds.window_limited;
    if (rep.l1_h.verdict == Verdict::certified && flags_ok) {
      rep.l1_k.verdict = Verdict::certified;
      rep.l1_k.reason =
          "the H certification transfers: lower-order terms satisfy the standing conditions";
    } else {
      rep.l1_k.verdict = Verdict::inconclusive;
      rep.l1_k.reason = rep.l1_h.verdict == Verdict::refuted
                            ? "the symmetric-part refutation does not transfer to K"
                            : (flags_ok ? "the H side is not certified"
                                        : "lower-order standing conditions not established");
    }
  }

  return rep;
}

UniquenessReport certify(const ProblemConfig& cfg, const std::string& label) {
  Scenario sc;
  sc.name = label;
  sc.problem = cfg;
  CapacityTarget t;
  t.kind = TargetKind::boundary;
  sc.targets = {t};
  return certify(sc);
}

// ---------------------------------------------------------------- emission

namespace {

njson conclusion_json(const Conclusion& c) {
  njson j;
  j["verdict"] = verdict_name(c.verdict);
  j["consumed"] = c.consumed;
  j["reason"] = c.reason;
  return j;
}

Conclusion conclusion_from(const njson& j) {
  Conclusion c;
  c.verdict = verdict_from(j.at("verdict").get<std::string>());
  c.consumed = j.at("consumed").get<std::vector<std::string>>();
  c.reason = j.at("reason").get<std::string>();
  return c;
}

njson report_json(const UniquenessReport& r) {
  njson j;
  j["schema"] = r.schema;
  j["scenario"] = r.scenario;

  njson grid;
  grid["dim"] = r.dim;
  grid["resolutions"] = r.resolutions;
  {
    njson sp = njson::array();
    for (double h : r.spacings) sp.push_back(jnum(h));
    grid["spacings"] = sp;
  }
  grid["stencil_order"] = r.stencil_order;
  grid["truncated"] = r.truncated;
  j["grid"] = grid;

  njson hyp;
  {
    njson b;
    b["ran"] = r.balls.ran;
    b["verdict"] = balls_name(r.balls.report.verdict);
    b["r_star"] = jnum(r.balls.report.r_star);
    b["note"] = r.balls.note;
    njson tr = njson::array();
    for (const auto& e : r.balls.report.trace) {
      njson t;
      t["trivially_bounded"] = e.trivially_bounded;
      t["r_star"] = jnum(e.r_star);
      t["h"] = jnum(e.h);
      t["truncation_candidates"] = e.truncation_candidates;
      t["degenerate_candidates"] = e.degenerate_candidates;
      tr.push_back(t);
    }
    b["trace"] = tr;
    hyp["balls"] = b;
  }
  {
    njson t;
    t["ran"] = r.tacklind.ran;
    t["verdict"] = tack_name(r.tacklind.report.verdict);
    t["mode"] = r.tacklind.report.mode;
    t["fitted"] = r.tacklind.report.fitted;
    t["beta"] = jnum(r.tacklind.report.beta);
    t["p"] = jnum(r.tacklind.report.p);
    t["q"] = jnum(r.tacklind.report.q);
    t["residual"] = jnum(r.tacklind.report.residual);
    t["note"] = r.tacklind.note;
    njson cv;
    njson rr = njson::array(), vv = njson::array(), tt = njson::array();
    for (double x : r.tacklind.curve.r) rr.push_back(jnum(x));
    for (double x : r.tacklind.curve.volume) vv.push_back(jnum(x));
    for (uint8_t x : r.tacklind.curve.truncated) tt.push_back(static_cast<int>(x));
    cv["r"] = rr;
    cv["volume"] = vv;
    cv["truncated"] = tt;
    t["curve"] = cv;
    hyp["tacklind"] = t;
  }
  {
    njson arr = njson::array();
    for (const auto& est : r.capacity) {
      njson c;
      c["target"] = est.target;
      c["verdict"] = cap_name(est.verdict);
      c["value"] = jnum(est.value);
      c["power_exponent"] = jnum(est.power_exponent);
      c["log_mode"] = est.log_mode;
      c["note"] = est.note;
      njson tr = njson::array();
      for (const auto& s : est.trace) {
        njson t;
        t["h"] = jnum(s.h);
        t["k"] = s.collar_k;
        t["value"] = jnum(s.value);
        tr.push_back(t);
      }
      c["trace"] = tr;
      arr.push_back(c);
    }
    hyp["capacity"] = arr;
  }
  {
    njson c;
    c["ran"] = r.ca.ran;
    c["verdict"] = ca_name(r.ca.verdict);
    c["route"] = r.ca.route;
    njson a = njson::array();
    for (double x : r.ca.a) a.push_back(jnum(x));
    c["a"] = a;
    njson bs = njson::array();
    for (const auto& row : r.ca.b) {
      njson rj = njson::array();
      for (double x : row) rj.push_back(jnum(x));
      bs.push_back(rj);
    }
    c["b"] = bs;
    njson fl = njson::array();
    for (double x : r.ca.floors) fl.push_back(jnum(x));
    c["floors"] = fl;
    c["note"] = r.ca.note;
    hyp["condition-ca"] = c;
  }
  {
    njson g;
    g["ran"] = r.gap.ran;
    g["reading"] = verdict_name(r.gap.reading);
    njson tr = njson::array();
    for (const auto& s : r.gap.trace) {
      njson t;
      t["h"] = jnum(s.h);
      t["value"] = jnum(s.value);
      tr.push_back(t);
    }
    g["trace"] = tr;
    g["note"] = r.gap.note;
    hyp["mass-gap"] = g;
  }
  {
    njson l;
    l["ran"] = r.lower.ran;
    l["omega0"] = jnum(r.lower.bounds.omega0);
    l["omega1"] = jnum(r.lower.bounds.omega1);
    l["kappa_max"] = jnum(r.lower.bounds.kappa_max);
    l["omega"] = jnum(r.lower.bounds.omega);
    l["sigma_min"] = jnum(r.lower.sigma_min);
    l["shift_defined"] = r.lower.shift_defined;
    njson cond;
    cond["c0_lower"] = r.lower.bounds.c0_lower;
    cond["divc_upper"] = r.lower.bounds.divc_upper;
    cond["matrix_order"] = r.lower.bounds.matrix_order;
    l["conditions"] = cond;
    l["window_limited"] = r.lower.bounds.window_limited;
    l["identical_to_h"] = r.lower.identical_to_h;
    l["note"] = r.lower.note;
    hyp["lower-order"] = l;
  }
  j["hypotheses"] = hyp;

  njson conc;
  conc["markov_uniqueness"] = conclusion_json(r.markov);
  conc["l1_uniqueness_H"] = conclusion_json(r.l1_h);
  conc["l1_uniqueness_K"] = conclusion_json(r.l1_k);
  j["conclusions"] = conc;
  j["flags"] = r.flags;
  return j;
}

const char* mark_of(Verdict v) {
  switch (v) {
    case Verdict::certified: return "✓";
    case Verdict::refuted: return "✗";
    default: return "?";
  }
}

Verdict balls_reading(const BallsRecord& b) {
  if (!b.ran) return Verdict::inconclusive;
  switch (b.report.verdict) {
    case BallsVerdict::bounded: return Verdict::certified;
    case BallsVerdict::suspect_unbounded: return Verdict::refuted;
    default: return Verdict::inconclusive;
  }
}
Verdict tack_reading(const TacklindRecord& t) {
  if (!t.ran) return Verdict::inconclusive;
  switch (t.report.verdict) {
    case TacklindVerdict::satisfied: return Verdict::certified;
    case TacklindVerdict::violated: return Verdict::refuted;
    default: return Verdict::inconclusive;
  }
}
Verdict cap_reading(const CapacityEstimate& c) {
  switch (c.verdict) {
    case CapacityVerdict::zero: return Verdict::certified;
    case CapacityVerdict::positive: return Verdict::refuted;
    default: return Verdict::inconclusive;
  }
}
Verdict ca_reading(const CARecord& c) {
  if (!c.ran) return Verdict::inconclusive;
  switch (c.verdict) {
    case CAVerdict::satisfied: return Verdict::certified;
    case CAVerdict::failed: return Verdict::refuted;
    default: return Verdict::inconclusive;
  }
}
Verdict lower_reading(const LowerOrderRecord& l) {
  if (!l.ran) return Verdict::inconclusive;
  if (l.bounds.c0_lower && l.bounds.divc_upper && l.bounds.matrix_order) return Verdict::certified;
  return Verdict::refuted;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string report_text(const UniquenessReport& r) {
  std::ostringstream os;
  os << "uniqlab certification report\n";
  os << "scenario: " << r.scenario << "\n";
  os << "grid: dim " << r.dim << ", resolutions";
  for (int n : r.resolutions) os << " " << n;
  os << " (h";
  for (double h : r.spacings) os << " " << fmt(h, 3);
  os << "), stencil order " << r.stencil_order;
  if (r.truncated) os << ", truncated window";
  os << "\n\n";

  os << "hypotheses\n";
  auto line = [&os](Verdict v, const std::string& name, const std::string& body) {
    os << "  " << mark_of(v) << " " << name;
    for (size_t i = name.size(); i < 13; ++i) os << ' ';
    os << body << "\n";
  };
  {
    std::string body = r.balls.ran ? std::string(balls_name(r.balls.report.verdict)) +
                                         " (r* = " + fmt(r.balls.report.r_star) + "): " + r.balls.note
                                   : "not computed: " + r.balls.note;
    line(balls_reading(r.balls), "balls", body);
  }
  {
    std::string body = r.tacklind.ran
                           ? std::string(tack_name(r.tacklind.report.verdict)) + " [" +
                                 r.tacklind.report.mode + "]: " + r.tacklind.note
                           : "not computed: " + r.tacklind.note;
    line(tack_reading(r.tacklind), "tacklind", body);
  }
  for (const auto& est : r.capacity) {
    std::string body = std::string(cap_name(est.verdict)) + " (" + est.target +
                       "): value " + fmt(est.value) + ", " + est.note;
    line(cap_reading(est), "capacity", body);
  }
  {
    std::string body = r.ca.ran ? std::string(ca_name(r.ca.verdict)) + " [" + r.ca.route +
                                      "]: " + r.ca.note
                                : "not computed [" + r.ca.route + "]: " + r.ca.note;
    line(ca_reading(r.ca), "condition-ca", body);
  }
  {
    std::string body =
        r.gap.ran ? (r.gap.reading == Verdict::certified
                         ? "vanishes: "
                         : (r.gap.reading == Verdict::refuted ? "stable positive: " : "open: ")) +
                        r.gap.note
                  : "not computed: " + r.gap.note;
    line(r.gap.reading, "mass-gap", body);
  }
  {
    std::string body;
    if (r.lower.ran) {
      body = "omega0 = " + fmt(r.lower.bounds.omega0) + ", omega1 = " + fmt(r.lower.bounds.omega1) +
             ", kappa_max = " + fmt(r.lower.bounds.kappa_max) +
             ", sigma_min = " + fmt(r.lower.sigma_min) + "; " + r.lower.note;
    } else {
      body = "not computed: " + r.lower.note;
    }
    line(lower_reading(r.lower), "lower-order", body);
  }

  os << "\nimplication chain\n";
  os << "  Markov <- capacity + condition-ca + mass-gap\n";
  os << "  L1(H)  <- balls + tacklind + Markov\n";
  os << "  L1(K)  <- L1(H) + lower-order\n";

  os << "\nconclusions\n";
  auto conc = [&os](Verdict v, const char* name, const Conclusion& c) {
    os << "  " << mark_of(v) << " " << name << ": " << upper(verdict_name(v)) << " ["
       << join(c.consumed, " + ") << "] " << c.reason << "\n";
  };
  conc(r.markov.verdict, "Markov", r.markov);
  conc(r.l1_h.verdict, "L1(H)", r.l1_h);
  conc(r.l1_k.verdict, "L1(K)", r.l1_k);

  if (r.flags.empty()) {
    os << "\nflags: none\n";
  } else {
    os << "\nflags\n";
    for (const auto& f : r.flags) os << "  ! " << f << "\n";
  }
  return os.str();
}

} // namespace

std::string emit_report(const UniquenessReport& rep, const std::string& format) {
  if (format == "json") return report_json(rep).dump(2) + "\n";
  if (format == "text") return report_text(rep);
  fail(ErrorCode::bad_parameter, "unknown report format '" + format + "' (json or text)");
}

UniquenessReport parse_report(const std::string& json_text) {
  njson j;
  try {
    j = njson::parse(json_text);
  } catch (const std::exception& e) {
    fail(ErrorCode::io_failure, std::string("report is not valid json: ") + e.what());
  }
  try {
    UniquenessReport r;
    r.schema = j.at("schema").get<std::string>();
    if (r.schema != "uniqlab-report/1")
      fail(ErrorCode::io_failure, "unsupported report schema '" + r.schema + "'");
    r.scenario = j.at("scenario").get<std::string>();
    const njson& grid = j.at("grid");
    r.dim = grid.at("dim").get<int>();
    r.resolutions = grid.at("resolutions").get<std::vector<int>>();
    for (const auto& x : grid.at("spacings")) r.spacings.push_back(jget(x));
    r.stencil_order = grid.at("stencil_order").get<int>();
    r.truncated = grid.at("truncated").get<bool>();

    const njson& hyp = j.at("hypotheses");
    {
      const njson& b = hyp.at("balls");
      r.balls.ran = b.at("ran").get<bool>();
      r.balls.report.verdict = balls_from(b.at("verdict").get<std::string>());
      r.balls.report.r_star = jget(b.at("r_star"));
      r.balls.note = b.at("note").get<std::string>();
      r.balls.report.evidence = r.balls.note;
      for (const auto& t : b.at("trace")) {
        BallsEvidence e;
        e.trivially_bounded = t.at("trivially_bounded").get<bool>();
        e.r_star = jget(t.at("r_star"));
        e.h = jget(t.at("h"));
        e.truncation_candidates = t.at("truncation_candidates").get<int>();
        e.degenerate_candidates = t.at("degenerate_candidates").get<int>();
        r.balls.report.trace.push_back(e);
      }
    }
    {
      const njson& t = hyp.at("tacklind");
      r.tacklind.ran = t.at("ran").get<bool>();
      r.tacklind.report.verdict = tack_from(t.at("verdict").get<std::string>());
      r.tacklind.report.mode = t.at("mode").get<std::string>();
      r.tacklind.report.fitted = t.at("fitted").get<bool>();
      r.tacklind.report.beta = jget(t.at("beta"));
      r.tacklind.report.p = jget(t.at("p"));
      r.tacklind.report.q = jget(t.at("q"));
      r.tacklind.report.residual = jget(t.at("residual"));
      r.tacklind.note = t.at("note").get<std::string>();
      r.tacklind.report.evidence = r.tacklind.note;
      const njson& cv = t.at("curve");
      for (const auto& x : cv.at("r")) r.tacklind.curve.r.push_back(jget(x));
      for (const auto& x : cv.at("volume")) r.tacklind.curve.volume.push_back(jget(x));
      for (const auto& x : cv.at("truncated"))
        r.tacklind.curve.truncated.push_back(static_cast<uint8_t>(x.get<int>()));
    }
    for (const auto& c : hyp.at("capacity")) {
      CapacityEstimate est;
      est.target = c.at("target").get<std::string>();
      est.verdict = cap_from(c.at("verdict").get<std::string>());
      est.value = jget(c.at("value"));
      est.power_exponent = jget(c.at("power_exponent"));
      est.log_mode = c.at("log_mode").get<bool>();
      est.note = c.at("note").get<std::string>();
      for (const auto& t : c.at("trace")) {
        CapacitySample s;
        s.h = jget(t.at("h"));
        s.collar_k = t.at("k").get<int>();
        s.value = jget(t.at("value"));
        est.trace.push_back(s);
      }
      r.capacity.push_back(std::move(est));
    }
    {
      const njson& c = hyp.at("condition-ca");
      r.ca.ran = c.at("ran").get<bool>();
      r.ca.verdict = ca_from(c.at("verdict").get<std::string>());
      r.ca.route = c.at("route").get<std::string>();
      for (const auto& x : c.at("a")) r.ca.a.push_back(jget(x));
      for (const auto& row : c.at("b")) {
        std::vector<double> v;
        for (const auto& x : row) v.push_back(jget(x));
        r.ca.b.push_back(std::move(v));
      }
      for (const auto& x : c.at("floors")) r.ca.floors.push_back(jget(x));
      r.ca.note = c.at("note").get<std::string>();
    }
    {
      const njson& g = hyp.at("mass-gap");
      r.gap.ran = g.at("ran").get<bool>();
      r.gap.reading = verdict_from(g.at("reading").get<std::string>());
      for (const auto& t : g.at("trace"))
        r.gap.trace.push_back({jget(t.at("h")), jget(t.at("value"))});
      r.gap.note = g.at("note").get<std::string>();
    }
    {
      const njson& l = hyp.at("lower-order");
      r.lower.ran = l.at("ran").get<bool>();
      r.lower.bounds.omega0 = jget(l.at("omega0"));
      r.lower.bounds.omega1 = jget(l.at("omega1"));
      r.lower.bounds.kappa_max = jget(l.at("kappa_max"));
      r.lower.bounds.omega = jget(l.at("omega"));
      r.lower.sigma_min = jget(l.at("sigma_min"));
      r.lower.shift_defined = l.at("shift_defined").get<bool>();
      const njson& cond = l.at("conditions");
      r.lower.bounds.c0_lower = cond.at("c0_lower").get<bool>();
      r.lower.bounds.divc_upper = cond.at("divc_upper").get<bool>();
      r.lower.bounds.matrix_order = cond.at("matrix_order").get<bool>();
      r.lower.bounds.window_limited = l.at("window_limited").get<bool>();
      r.lower.identical_to_h = l.at("identical_to_h").get<bool>();
      r.lower.note = l.at("note").get<std::string>();
    }

    const njson& conc = j.at("conclusions");
    r.markov = conclusion_from(conc.at("markov_uniqueness"));
    r.l1_h = conclusion_from(conc.at("l1_uniqueness_H"));
    r.l1_k = conclusion_from(conc.at("l1_uniqueness_K"));
    r.flags = j.at("flags").get<std::vector<std::string>>();
    return r;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::io_failure, std::string("report json missing fields: ") + e.what());
  }
}

// ------------------------------------------------------------- scenario run

namespace {

std::string csv_growth(const GrowthCurve& c) {
  std::ostringstream os;
  os << "r,volume,truncated\n";
  for (size_t i = 0; i < c.r.size(); ++i)
    os << c.r[i] << "," << c.volume[i] << "," << static_cast<int>(c.truncated[i]) << "\n";
  return os.str();
}

std::string csv_capacity(const CapacityEstimate& est) {
  std::ostringstream os;
  os << "h,k,value\n";
  for (const auto& s : est.trace) os << s.h << "," << s.collar_k << "," << s.value << "\n";
  return os.str();
}

std::string csv_gap(const std::vector<RefinementSample>& tr) {
  std::ostringstream os;
  os << "h,gap\n";
  for (const auto& s : tr) os << s.h << "," << s.value << "\n";
  return os.str();
}

std::string csv_trajectory(const Trajectory& tr) {
  std::ostringstream os;
  os << "t,mass,l2norm,linfnorm\n";
  for (const auto& s : tr.stats) os << s.t << "," << s.mass << "," << s.l2 << "," << s.linf << "\n";
  return os.str();
}

} // namespace

ScenarioRun run_scenario(const std::string& name, bool quick) {
  Scenario sc = make_scenario(name, quick);
  ScenarioRun run;
  run.report = certify(sc);

  if (!run.report.tacklind.curve.r.empty())
    run.artifacts.emplace_back("growth.csv", csv_growth(run.report.tacklind.curve));
  for (size_t i = 0; i < run.report.capacity.size(); ++i)
    if (!run.report.capacity[i].trace.empty())
      run.artifacts.emplace_back("capacity_" + std::to_string(i) + ".csv",
                                 csv_capacity(run.report.capacity[i]));
  if (!run.report.gap.trace.empty())
    run.artifacts.emplace_back("massgap.csv", csv_gap(run.report.gap.trace));

  // finest-grid heat run for the record, skipped on windows where the
  // Dirichlet flavor drains through the truncation faces
  if (!run.report.truncated) {
    Grid grid = build_grid(sc.problem.domain, sc.problem.grid.resolutions.back());
    CoefficientField field = sample_coefficients(grid, sc.problem.coefficients);
    auto gen = assemble_generator(grid, field, GeneratorKind::h_dirichlet);
    std::vector<double> ones(static_cast<size_t>(grid.interior_count()), 1.0);
    EvolveOptions opt;
    opt.dt = sc.dt;
    auto traj = evolve(grid, gen, ones, sc.horizon, opt);
    run.artifacts.emplace_back("trajectory.csv", csv_trajectory(traj));
  }
  return run;
}

} // namespace uniqlab
