#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "uniqlab/expr.hpp"

namespace uniqlab {

// Open set the operator lives on: a bounding box intersected with a shape
// predicate.  Faces of the box may be flagged as truncation faces when the
// box is only a finite window on an unbounded domain; downstream analysis
// treats those as window edges, never as boundary.
enum class Shape {
  box,        // the whole open box
  ball,       // |x - center| < radius, optionally minus the closed ball
              // |x - center| <= puncture_radius (puncture_radius = 0 removes
              // exactly the nodes sitting on the center)
  mask_expr,  // inside iff expression > 0.5
  mask_file,  // externally supplied row-major 0/1 node mask
};

struct DomainSpec {
  int dim = 1;
  std::array<double, 3> lo{0, 0, 0};
  std::array<double, 3> hi{1, 1, 1};
  // truncation flags per face, indexed 2*axis + (0 lo side, 1 hi side)
  std::array<bool, 6> truncation{};
  Shape shape = Shape::box;
  std::array<double, 3> center{0, 0, 0};
  double radius = 0;
  double puncture_radius = -1;  // < 0: no puncture
  Expr mask;                    // for mask_expr
  std::string mask_path;        // for mask_file
  // base point for the Riemannian distance (the coordinate origin after the
  // recentring convention); must land strictly inside the domain
  std::array<double, 3> origin{0, 0, 0};

  bool has_truncation() const {
    for (int f = 0; f < 2 * dim; ++f)
      if (truncation[static_cast<size_t>(f)]) return true;
    return false;
  }
};

// Uniform node-centered lattice over the bounding box.  resolution n per axis
// places nodes at lo + i*h, i = 0..n-1, h = (hi-lo)/(n-1); nodes on the box
// edge are never interior, so e.g. (0,1)^2 at resolution 65 has 63^2 interior
// nodes and h = 1/64.
struct Grid {
  int dim = 1;
  std::array<int, 3> n{1, 1, 1};
  std::array<double, 3> lo{}, h{};
  std::array<bool, 6> truncation{};

  std::vector<int32_t> interior_id;  // flat node index -> interior id, -1 outside
  std::vector<int32_t> node_of;      // interior id -> flat node index
  double cell_volume = 0;            // prod h_k

  // per interior node: Chebyshev cell distance (saturated at collar_max+1)
  // to the nearest non-interior position; second array counts only positions
  // not explained by a truncation face (i.e. genuine boundary)
  static constexpr int collar_max = 3;
  std::vector<uint8_t> cheb_outside;
  std::vector<uint8_t> cheb_true_boundary;

  int interior_count() const { return static_cast<int>(node_of.size()); }
  // unused axes keep n = 1, so this is always the lattice size
  int64_t node_count() const { return int64_t(n[0]) * n[1] * n[2]; }

  int64_t flat(int i, int j = 0, int k = 0) const {
    return (int64_t(k) * n[1] + j) * n[0] + i;
  }
  std::array<int, 3> unflat(int64_t f) const {
    int i = static_cast<int>(f % n[0]);
    int j = static_cast<int>((f / n[0]) % n[1]);
    int k = static_cast<int>(f / (int64_t(n[0]) * n[1]));
    return {i, j, k};
  }
  std::array<double, 3> coords(int64_t f) const {
    auto idx = unflat(f);
    return {lo[0] + idx[0] * h[0], lo[1] + idx[1] * h[1], lo[2] + idx[2] * h[2]};
  }
  std::array<double, 3> coords_of_interior(int32_t id) const {
    return coords(node_of[static_cast<size_t>(id)]);
  }

  // interior id of the axis neighbor, -1 if that position is not interior
  int32_t neighbor(int32_t id, int axis, int step) const;

  // nodes with cheb_outside <= k (within k cells of anything non-interior)
  std::vector<int32_t> collar(int k) const;
  // nodes with cheb_true_boundary <= k (truncation faces excluded)
  std::vector<int32_t> boundary_collar(int k) const;
  // nodes within k cells of one particular box face
  std::vector<int32_t> face_collar(int axis, int side, int k) const;
  // nodes adjacent (within 1 cell) to a truncation face
  std::vector<int32_t> truncation_adjacent() const;

  // quadrature weight of an interior node: cell_volume stretched by half a
  // cell toward every missing axis neighbor, so that box domains tile exactly
  double node_weight(int32_t id) const;
};

// resolution: nodes per axis (a single value is broadcast).
// throws: non_positive_resolution, box_invalid, mask_shape_mismatch,
//         empty_interior
Grid build_grid(const DomainSpec& spec, const std::array<int, 3>& resolution);
Grid build_grid(const DomainSpec& spec, int resolution);

} // namespace uniqlab
