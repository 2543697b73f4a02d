#pragma once
#include <array>
#include <string>
#include <vector>

#include "uniqlab/grid.hpp"

namespace uniqlab {

// Coefficients of the operator: the symmetric matrix C = (c_kl) of the
// principal part, the first-order vector c and the zero-order term c0,
// given as coordinate expressions.  Empty entries default to the identity
// on the diagonal of C and to zero elsewhere.
struct CoefficientSpec {
  // upper triangle, row-major: c11, c12, c13, c22, c23, c33
  std::array<std::string, 6> principal{};
  std::array<std::string, 3> drift{};
  std::string zero_order{};
};

// packed upper-triangle index of (r, c), r <= c after swap; row-major:
// d=2 -> c11 c12 c22, d=3 -> c11 c12 c13 c22 c23 c33
inline int pk(int dim, int r, int c) {
  if (r > c) { int t = r; r = c; c = t; }
  if (dim == 1) return 0;
  if (dim == 2) return r == 0 ? c : 2;
  static constexpr int idx3[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  return idx3[r][c];
}

// Sampled field over the interior nodes.  C is stored packed upper-triangular
// per node (1, 3 or 6 entries), validated finite and strictly positive
// definite at every node; degeneracy toward the boundary is expected and
// fine, the nodes themselves never sit on it.
struct CoefficientField {
  int dim = 1;
  int tri = 1;  // packed size d(d+1)/2
  std::vector<double> C;     // interior_count * tri
  std::vector<double> c;     // interior_count * dim (empty if no drift)
  std::vector<double> c0;    // interior_count (empty if no zero-order term)
  bool has_drift = false;
  bool has_zero_order = false;

  const double* C_at(int32_t id) const { return &C[static_cast<size_t>(id) * tri]; }
  // full symmetric matrix at a node, padded to 3x3
  std::array<double, 9> C_mat(int32_t id) const;
  double drift_at(int32_t id, int axis) const {
    return has_drift ? c[static_cast<size_t>(id) * dim + axis] : 0.0;
  }
  double zero_at(int32_t id) const {
    return has_zero_order ? c0[static_cast<size_t>(id)] : 0.0;
  }
  // smallest eigenvalue of C at a node (d <= 3 closed forms / Eigen)
  double lambda_min(int32_t id) const;
};

// throws: non_finite_coefficient, not_positive_definite (messages carry the
// offending node's coordinates), expr errors from parsing
CoefficientField sample_coefficients(const Grid& grid, const CoefficientSpec& spec);

} // namespace uniqlab
