#include "uniqlab/grid.hpp"
#include "uniqlab/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace uniqlab {

namespace {

// inside test for a lattice position; positions outside the box index range
// are never inside
struct InsidePredicate {
  const DomainSpec& spec;
  const Grid& g;
  const std::vector<uint8_t>* raw = nullptr;

  bool operator()(int i, int j, int k) const {
    for (int a = 0; a < g.dim; ++a) {
      int idx = a == 0 ? i : (a == 1 ? j : k);
      // box edge nodes are boundary, not interior
      if (idx <= 0 || idx >= g.n[static_cast<size_t>(a)] - 1) return false;
    }
    std::array<double, 3> x = g.coords(g.flat(i, j, k));
    switch (spec.shape) {
      case Shape::box:
        return true;
      case Shape::ball: {
        double r2 = 0;
        for (int a = 0; a < g.dim; ++a) {
          double d = x[static_cast<size_t>(a)] - spec.center[static_cast<size_t>(a)];
          r2 += d * d;
        }
        double r = std::sqrt(r2);
        if (r >= spec.radius) return false;
        if (spec.puncture_radius >= 0) {
          double snap = 1e-9 * spec.radius;
          if (r <= spec.puncture_radius + snap) return false;
        }
        return true;
      }
      case Shape::mask_expr:
        return spec.mask.eval(x) > 0.5;
      case Shape::mask_file:
        return (*raw)[static_cast<size_t>(g.flat(i, j, k))] != 0;
    }
    return false;
  }
};

std::vector<uint8_t> load_raw_mask(const std::string& path, const Grid& g) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_failure, "cannot open mask file " + path);
  std::vector<uint8_t> mask;
  mask.reserve(static_cast<size_t>(g.node_count()));
  int v;
  while (in >> v) {
    if (v != 0 && v != 1)
      fail(ErrorCode::mask_shape_mismatch, "mask entries must be 0/1, got " + std::to_string(v));
    mask.push_back(static_cast<uint8_t>(v));
  }
  if (mask.size() != static_cast<size_t>(g.node_count()))
    fail(ErrorCode::mask_shape_mismatch,
         "mask file " + path + " has " + std::to_string(mask.size()) + " entries, grid needs " +
             std::to_string(g.node_count()));
  return mask;
}

} // namespace

int32_t Grid::neighbor(int32_t id, int axis, int step) const {
  auto idx = unflat(node_of[static_cast<size_t>(id)]);
  idx[static_cast<size_t>(axis)] += step;
  if (idx[static_cast<size_t>(axis)] < 0 ||
      idx[static_cast<size_t>(axis)] >= n[static_cast<size_t>(axis)])
    return -1;
  return interior_id[static_cast<size_t>(flat(idx[0], idx[1], idx[2]))];
}

std::vector<int32_t> Grid::collar(int k) const {
  std::vector<int32_t> out;
  for (int32_t id = 0; id < interior_count(); ++id)
    if (cheb_outside[static_cast<size_t>(id)] <= k) out.push_back(id);
  return out;
}

std::vector<int32_t> Grid::boundary_collar(int k) const {
  std::vector<int32_t> out;
  for (int32_t id = 0; id < interior_count(); ++id)
    if (cheb_true_boundary[static_cast<size_t>(id)] <= k) out.push_back(id);
  return out;
}

std::vector<int32_t> Grid::face_collar(int axis, int side, int k) const {
  std::vector<int32_t> out;
  for (int32_t id = 0; id < interior_count(); ++id) {
    auto idx = unflat(node_of[static_cast<size_t>(id)]);
    int d = side == 0 ? idx[static_cast<size_t>(axis)]
                      : n[static_cast<size_t>(axis)] - 1 - idx[static_cast<size_t>(axis)];
    if (d <= k) out.push_back(id);
  }
  return out;
}

std::vector<int32_t> Grid::truncation_adjacent() const {
  std::vector<int32_t> out;
  for (int32_t id = 0; id < interior_count(); ++id) {
    auto idx = unflat(node_of[static_cast<size_t>(id)]);
    bool adj = false;
    for (int a = 0; a < dim && !adj; ++a) {
      if (truncation[static_cast<size_t>(2 * a)] && idx[static_cast<size_t>(a)] == 1) adj = true;
      if (truncation[static_cast<size_t>(2 * a + 1)] &&
          idx[static_cast<size_t>(a)] == n[static_cast<size_t>(a)] - 2)
        adj = true;
    }
    if (adj) out.push_back(id);
  }
  return out;
}

double Grid::node_weight(int32_t id) const {
  double w = cell_volume;
  for (int a = 0; a < dim; ++a) {
    double f = 1.0;
    if (neighbor(id, a, -1) < 0) f += 0.5;
    if (neighbor(id, a, +1) < 0) f += 0.5;
    w *= f;
  }
  return w;
}

Grid build_grid(const DomainSpec& spec, const std::array<int, 3>& resolution) {
  if (spec.dim < 1 || spec.dim > 3)
    fail(ErrorCode::bad_parameter, "dimension must be 1, 2 or 3");
  Grid g;
  g.dim = spec.dim;
  g.truncation = spec.truncation;
  g.cell_volume = 1;
  for (int a = 0; a < spec.dim; ++a) {
    size_t ua = static_cast<size_t>(a);
    int na = resolution[ua];
    if (na < 3)
      fail(ErrorCode::non_positive_resolution,
           "resolution must be >= 3 nodes per axis, got " + std::to_string(na));
    if (!(spec.hi[ua] > spec.lo[ua]))
      fail(ErrorCode::box_invalid, "box upper bound must exceed lower bound on axis " +
                                       std::to_string(a + 1));
    g.n[ua] = na;
    g.lo[ua] = spec.lo[ua];
    g.h[ua] = (spec.hi[ua] - spec.lo[ua]) / (na - 1);
    g.cell_volume *= g.h[ua];
  }

  int64_t total = g.node_count();
  g.interior_id.assign(static_cast<size_t>(total), -1);

  std::vector<uint8_t> raw;
  InsidePredicate inside{spec, g, nullptr};
  if (spec.shape == Shape::mask_file) {
    raw = load_raw_mask(spec.mask_path, g);
    inside.raw = &raw;
  }

  int nz = g.dim > 2 ? g.n[2] : 1;
  int ny = g.dim > 1 ? g.n[1] : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < g.n[0]; ++i)
        if (inside(i, j, k)) {
          g.interior_id[static_cast<size_t>(g.flat(i, j, k))] =
              static_cast<int32_t>(g.node_of.size());
          g.node_of.push_back(static_cast<int32_t>(g.flat(i, j, k)));
        }

  if (g.node_of.empty()) fail(ErrorCode::empty_interior, "domain has no interior nodes");

  // collar distances: scan the (2K+1)^d Chebyshev neighborhood of each
  // interior node.  A non-interior position beyond the box counts as genuine
  // boundary unless every box face it crosses is a truncation face.
  const int K = Grid::collar_max;
  size_t cnt = g.node_of.size();
  g.cheb_outside.assign(cnt, K + 1);
  g.cheb_true_boundary.assign(cnt, K + 1);
  for (size_t id = 0; id < cnt; ++id) {
    auto idx = g.unflat(g.node_of[id]);
    uint8_t any = K + 1, true_b = K + 1;
    int r2max = g.dim > 2 ? K : 0;
    int r1max = g.dim > 1 ? K : 0;
    for (int dk = -r2max; dk <= r2max; ++dk)
      for (int dj = -r1max; dj <= r1max; ++dj)
        for (int di = -K; di <= K; ++di) {
          if (!di && !dj && !dk) continue;
          int i = idx[0] + di, j = idx[1] + dj, k = idx[2] + dk;
          bool off_grid = false, only_truncation = true;
          for (int a = 0; a < g.dim; ++a) {
            int v = a == 0 ? i : (a == 1 ? j : k);
            size_t ua = static_cast<size_t>(a);
            if (v < 0) { off_grid = true; only_truncation &= g.truncation[2 * ua]; }
            if (v > g.n[ua] - 1) { off_grid = true; only_truncation &= g.truncation[2 * ua + 1]; }
          }
          bool is_interior =
              !off_grid && g.interior_id[static_cast<size_t>(g.flat(i, j, k))] >= 0;
          if (is_interior) continue;
          uint8_t cd = static_cast<uint8_t>(
              std::max({std::abs(di), std::abs(dj), std::abs(dk)}));
          any = std::min(any, cd);
          // on-grid non-interior positions: truncation-explained only when the
          // node sits on a truncation face of the box (window edge samples);
          // everything else (shape mask, true box walls) is genuine boundary
          bool truncation_explained;
          if (off_grid) {
            truncation_explained = only_truncation;
          } else {
            truncation_explained = false;
            for (int a = 0; a < g.dim; ++a) {
              int v = a == 0 ? i : (a == 1 ? j : k);
              size_t ua = static_cast<size_t>(a);
              if (v == 0 && g.truncation[2 * ua]) truncation_explained = true;
              if (v == g.n[ua] - 1 && g.truncation[2 * ua + 1]) truncation_explained = true;
            }
            // a masked-out node strictly inside the box is never a window edge
            bool on_box_edge = false;
            for (int a = 0; a < g.dim; ++a) {
              int v = a == 0 ? i : (a == 1 ? j : k);
              if (v == 0 || v == g.n[static_cast<size_t>(a)] - 1) on_box_edge = true;
            }
            if (!on_box_edge) truncation_explained = false;
          }
          if (!truncation_explained) true_b = std::min(true_b, cd);
        }
    g.cheb_outside[id] = any;
    g.cheb_true_boundary[id] = true_b;
  }
  return g;
}

Grid build_grid(const DomainSpec& spec, int resolution) {
  return build_grid(spec, {resolution, resolution, resolution});
}

} // namespace uniqlab
