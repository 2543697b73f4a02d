#include "uniqlab/scenario.hpp"

#include "uniqlab/errors.hpp"

namespace uniqlab {

namespace {

CapacityTarget boundary_target() {
  CapacityTarget t;
  t.kind = TargetKind::boundary;
  return t;
}

CapacityTarget point_target(double x, double y = 0) {
  CapacityTarget t;
  t.kind = TargetKind::point;
  t.point = {x, y, 0};
  return t;
}

// boundary minus a disk around `point`: probes one piece of a split boundary
CapacityTarget rim_target(double cx, double cy, double exclude) {
  CapacityTarget t;
  t.kind = TargetKind::boundary;
  t.point = {cx, cy, 0};
  t.exclude_radius = exclude;
  return t;
}

Scenario interval(const std::string& name, const std::string& blurb, const std::string& coeffs,
                  bool quick) {
  Scenario sc;
  sc.name = name;
  sc.blurb = blurb;
  sc.problem = parse_config(
      "[domain]\n"
      "dim = 1\n"
      "box = 0 1\n"
      "origin = 0.5\n"
      "[coefficients]\n" +
      coeffs +
      "[grid]\n"
      "resolution = " +
      std::string(quick ? "101 201" : "251 501 1001") + "\n");
  sc.targets = {boundary_target(), point_target(0.0), point_target(1.0)};
  return sc;
}

} // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {
      "euclidean-square", "euclidean-plane-window", "interval-alpha0", "interval-alpha05",
      "interval-alpha1",  "interval-alpha2",        "punctured-disk",  "fast-metric-line",
      "cusp-strip",       "drift-K-demo",
  };
  return names;
}

bool is_scenario(const std::string& name) {
  for (const auto& n : scenario_names())
    if (n == name) return true;
  return false;
}

Scenario make_scenario(const std::string& name, bool quick) {
  if (name == "euclidean-square") {
    Scenario sc;
    sc.name = name;
    sc.blurb = "flat unit square: the classical Dirichlet/Neumann mismatch";
    sc.problem = parse_config(
        "[domain]\n"
        "dim = 2\n"
        "box = 0 1 0 1\n"
        "origin = 0.5 0.5\n"
        "[coefficients]\n"
        "c11 = 1\n"
        "c22 = 1\n"
        "[grid]\n"
        "resolution = " +
        std::string(quick ? "17 33" : "33 65 129") + "\n");
    sc.targets = {boundary_target()};
    return sc;
  }
  if (name == "euclidean-plane-window") {
    Scenario sc;
    sc.name = name;
    sc.blurb = "flat plane seen through a window: everything stays window-limited";
    sc.problem = parse_config(
        "[domain]\n"
        "dim = 2\n"
        "box = -1 1 -1 1\n"
        "truncate = x1lo x1hi x2lo x2hi\n"
        "origin = 0 0\n"
        "[coefficients]\n"
        "c11 = 1\n"
        "c22 = 1\n"
        "[grid]\n"
        "resolution = " +
        std::string(quick ? "17 33" : "33 65 129") + "\n");
    sc.targets = {boundary_target()};
    sc.r_max = 0.9;       // below the window edge: honest bounded-up-to
    sc.growth_radii = 10; // leaves < 8 untruncated radii: growth stays open
    return sc;
  }
  if (name == "interval-alpha0")
    return interval(name, "unit interval, constant coefficient: both ends carry capacity",
                    "c11 = 1\n", quick);
  if (name == "interval-alpha05")
    return interval(name, "degenerate ends, integrable inverse: capacity survives",
                    "c11 = (x1*(1-x1))^0.5\n", quick);
  if (name == "interval-alpha1")
    return interval(name, "borderline degeneracy: capacity dies logarithmically",
                    "c11 = x1*(1-x1)\n", quick);
  if (name == "interval-alpha2")
    return interval(name, "strongly degenerate ends: the fully certified case",
                    "c11 = (x1*(1-x1))^2\n", quick);
  if (name == "drift-K-demo")
    return interval(name, "degenerate interval plus drift and zero order meeting the standing conditions",
                    "c11 = (x1*(1-x1))^2\ndrift1 = x1*(1-x1)\nc0 = 1\n", quick);
  if (name == "punctured-disk") {
    Scenario sc;
    sc.name = name;
    sc.blurb = "unit disk minus its center: the puncture is invisible, the rim is not";
    sc.problem = parse_config(
        "[domain]\n"
        "dim = 2\n"
        "box = -1 1 -1 1\n"
        "shape = ball\n"
        "center = 0 0\n"
        "radius = 1\n"
        "puncture = 0\n"
        "origin = 0.3 0\n"
        "[coefficients]\n"
        "c11 = 1\n"
        "c22 = 1\n"
        "[grid]\n"
        "resolution = " +
        std::string(quick ? "33 65" : "49 97 193") + "\n");
    sc.targets = {boundary_target(), point_target(0.0, 0.0), rim_target(0.0, 0.0, 0.2)};
    return sc;
  }
  if (name == "fast-metric-line") {
    Scenario sc;
    sc.name = name;
    sc.blurb = "line with a fast metric: infinity sits at finite distance";
    sc.problem = parse_config(
        "[domain]\n"
        "dim = 1\n"
        "box = -50 50\n"
        "truncate = x1lo x1hi\n"
        "origin = 0\n"
        "[coefficients]\n"
        "c11 = (1+x1^2)^2\n"
        "[grid]\n"
        "resolution = " +
        std::string(quick ? "1001 2001" : "2001 4001") + "\n");
    sc.targets = {boundary_target()};
    sc.r_max = 3.0;
    return sc;
  }
  if (name == "cusp-strip") {
    Scenario sc;
    sc.name = name;
    sc.blurb = "strip whose far end is reachable through a narrowing fast channel";
    sc.problem = parse_config(
        "[domain]\n"
        "dim = 2\n"
        "box = 0 16 -1 1\n"
        "truncate = x1hi\n"
        "origin = 1 0\n"
        "[coefficients]\n"
        "c11 = 1 + x1^4*(max(0, 1 - x2^2*(1+x1)))^2\n"
        "c22 = 1\n"
        "[grid]\n"
        "resolution = " +
        std::string(quick ? "33 65" : "65 129 257") + "\n");
    sc.targets = {boundary_target()};
    sc.r_max = 2.0;
    return sc;
  }
  fail(ErrorCode::bad_parameter, "unknown scenario '" + name + "'");
}

} // namespace uniqlab
