#pragma once
#include <string>
#include <vector>

#include "uniqlab/capacity.hpp"
#include "uniqlab/config.hpp"

namespace uniqlab {

// A canned certification problem: the parsed config plus the knobs certify()
// needs beyond it.  The first capacity target must be the one whose minimizer
// ladder feeds the cutoff-sequence route (boundary for every stock scenario);
// later targets are extra probes reported individually.
struct Scenario {
  std::string name;
  std::string blurb;
  ProblemConfig problem;
  std::vector<CapacityTarget> targets;
  double r_max = 0;         // escape scale for the ball verdict; 0 = 2x max rho
  int growth_radii = 14;    // radii spread over the reachable metric range
  double radii_top = 1.10;  // top radius as a multiple of max finite rho
  double horizon = 0.1;     // mass-gap evolution time
  double dt = 1e-3;
  double tol_cap = 1e-2;
};

const std::vector<std::string>& scenario_names();
bool is_scenario(const std::string& name);

// quick variants trim the resolution ladders for smoke runs; verdicts on the
// stock library are unchanged, only the evidence gets coarser.  throws
// bad_parameter on a name outside scenario_names().
Scenario make_scenario(const std::string& name, bool quick = false);

} // namespace uniqlab
