#pragma once
#include <string>
#include <vector>

#include "uniqlab/coefficients.hpp"
#include "uniqlab/grid.hpp"

namespace uniqlab {

// Everything a run needs, parsed from the sectioned key/value config format:
//
//   [domain]
//   dim = 1
//   box = 0 1                  # lo hi per axis
//   shape = box                # box | ball | mask-expr | mask-file
//   truncate = x1hi            # faces: x1lo x1hi x2lo x2hi x3lo x3hi
//   origin = 0.5
//   [coefficients]
//   c11 = x1^2 * (1-x1)^2
//   drift1 = x1*(1-x1)
//   c0 = 1
//   [grid]
//   resolution = 1001          # nodes per axis; several values = ladder
//   stencil = 2                # neighbor order for the distance stencil
//
// '#' starts a comment; unknown keys are an error (typos must not silently
// change the operator under study).
struct GridParams {
  std::vector<int> resolutions{65};  // refinement ladder, coarse to fine
  int stencil_order = 2;
};

struct ProblemConfig {
  DomainSpec domain;
  CoefficientSpec coefficients;
  GridParams grid;
};

// throws Error(config_parse / unknown_key / bad_parameter) with line numbers
ProblemConfig parse_config(const std::string& text);
ProblemConfig load_config(const std::string& path);

} // namespace uniqlab
