#pragma once
#include <string>
#include <utility>
#include <vector>

#include "uniqlab/capacity.hpp"
#include "uniqlab/distance.hpp"
#include "uniqlab/lower_order.hpp"
#include "uniqlab/scenario.hpp"
#include "uniqlab/semigroup.hpp"
#include "uniqlab/tacklind.hpp"

namespace uniqlab {

// Three-valued conclusions: every hypothesis here is asymptotic, so honest
// inconclusiveness is a first-class outcome, not an error state.
enum class Verdict { certified, refuted, inconclusive };
const char* verdict_name(Verdict v);

// Hypothesis records keep the native evidence of the module that produced
// them; `ran` false plus a diagnostic note is how module errors surface
// (a hypothesis that could not be computed never silently passes).
struct BallsRecord {
  bool ran = false;
  BallsReport report;
  std::string note;
};

struct TacklindRecord {
  bool ran = false;
  TacklindReport report;
  GrowthCurve curve;  // the empirical volume data the verdict was read from
  std::string note;
};

struct CARecord {
  bool ran = false;
  CAVerdict verdict = CAVerdict::inconclusive;
  std::string route;  // "capacity-complement", "discrete-floor", "skipped"
  std::vector<double> a;
  std::vector<std::vector<double>> b;
  std::vector<double> floors;  // discrete-floor route, one per resolution
  std::string note;
};

struct GapRecord {
  bool ran = false;
  Verdict reading = Verdict::inconclusive;  // vanishes / stable positive / ?
  std::vector<RefinementSample> trace;
  std::string note;
};

struct LowerOrderRecord {
  bool ran = false;
  LowerOrderBounds bounds;
  double sigma_min = 0;
  bool shift_defined = false;
  bool identical_to_h = true;  // no drift, no zero order: K is H
  std::string note;
};

struct Conclusion {
  Verdict verdict = Verdict::inconclusive;
  std::vector<std::string> consumed;  // hypothesis ids the verdict used
  std::string reason;
};

// Everything a certification run produces.  The conclusions never reference
// a hypothesis they do not list in `consumed`, and definitive witnesses that
// contradict each other raise a flag instead of being averaged away.
struct UniquenessReport {
  std::string schema = "uniqlab-report/1";
  std::string scenario;

  int dim = 0;
  std::vector<int> resolutions;
  std::vector<double> spacings;  // finest-axis h per resolution
  int stencil_order = 2;
  bool truncated = false;

  BallsRecord balls;
  TacklindRecord tacklind;
  std::vector<CapacityEstimate> capacity;  // one per target, first = verdict driver
  CARecord ca;
  GapRecord gap;
  LowerOrderRecord lower;

  Conclusion markov, l1_h, l1_k;
  std::vector<std::string> flags;
};

// Runs the hypothesis modules over the scenario's resolution ladder and fills
// the report.  Requires at least two resolutions (single-grid numbers prove
// nothing about the limit); module failures inside one hypothesis become an
// inconclusive record with the diagnostic attached.
UniquenessReport certify(const Scenario& sc);
// config-driven run with stock knobs: boundary capacity target, auto radii
UniquenessReport certify(const ProblemConfig& cfg, const std::string& label = "custom");

// format "json" (stable field order, schema version inside) or "text"
// (implication chain with per-hypothesis marks)
std::string emit_report(const UniquenessReport& rep, const std::string& format);
UniquenessReport parse_report(const std::string& json_text);

// named scenario end to end; artifacts are (filename, content) pairs ready to
// be written next to the report (growth curve, capacity traces, mass-gap
// trace, and the finest-grid trajectory when one was run)
struct ScenarioRun {
  UniquenessReport report;
  std::vector<std::pair<std::string, std::string>> artifacts;
};
ScenarioRun run_scenario(const std::string& name, bool quick = false);

} // namespace uniqlab
