#pragma once
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "uniqlab/coefficients.hpp"
#include "uniqlab/grid.hpp"

namespace testutil {

using namespace uniqlab;

struct Problem {
  Grid grid;
  CoefficientField field;
};

inline Problem interval(int resolution, const std::string& c11 = "",
                        double origin_x = 0.5) {
  DomainSpec spec;
  spec.dim = 1;
  spec.lo = {0, 0, 0};
  spec.hi = {1, 1, 1};
  spec.origin = {origin_x, 0, 0};
  Grid g = build_grid(spec, resolution);
  CoefficientSpec cs;
  if (!c11.empty()) cs.principal[0] = c11;
  CoefficientField f = sample_coefficients(g, cs);
  return {std::move(g), std::move(f)};
}

inline Problem square(int resolution, const CoefficientSpec& cs = {},
                      std::array<double, 3> origin = {0.5, 0.5, 0}) {
  DomainSpec spec;
  spec.dim = 2;
  spec.lo = {0, 0, 0};
  spec.hi = {1, 1, 1};
  spec.origin = origin;
  Grid g = build_grid(spec, resolution);
  CoefficientField f = sample_coefficients(g, cs);
  return {std::move(g), std::move(f)};
}

// node values of an analytic function of the coordinates
template <class F>
std::vector<double> sample(const Grid& g, F&& fn) {
  std::vector<double> v(static_cast<size_t>(g.interior_count()));
  for (int id = 0; id < g.interior_count(); ++id) {
    auto x = g.coords_of_interior(id);
    v[static_cast<size_t>(id)] = fn(x);
  }
  return v;
}

inline std::vector<double> random_values(const Grid& g, unsigned seed, double lo = -2.0,
                                         double hi = 2.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<double> v(static_cast<size_t>(g.interior_count()));
  for (auto& x : v) x = U(rng);
  return v;
}

inline std::vector<double> zero_on_collar(const Grid& g, std::vector<double> v, int k = 1) {
  for (int32_t id : g.collar(k)) v[static_cast<size_t>(id)] = 0.0;
  return v;
}

} // namespace testutil
