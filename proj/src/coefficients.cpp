#include "uniqlab/coefficients.hpp"
#include "uniqlab/errors.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

namespace uniqlab {

namespace {

std::string node_str(const Grid& g, int32_t id) {
  auto x = g.coords_of_interior(id);
  std::ostringstream os;
  os << "(";
  for (int a = 0; a < g.dim; ++a) os << (a ? ", " : "") << x[static_cast<size_t>(a)];
  os << ")";
  return os.str();
}

} // namespace

std::array<double, 9> CoefficientField::C_mat(int32_t id) const {
  std::array<double, 9> m{};
  const double* p = C_at(id);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c)
      m[static_cast<size_t>(3 * r + c)] = p[pk(dim, std::min(r, c), std::max(r, c))];
  return m;
}

double CoefficientField::lambda_min(int32_t id) const {
  auto m = C_mat(id);
  if (dim == 1) return m[0];
  if (dim == 2) {
    double a = m[0], b = m[1], d = m[4];
    double tr = a + d, disc = std::sqrt((a - d) * (a - d) + 4 * b * b);
    return 0.5 * (tr - disc);
  }
  Eigen::Matrix3d M;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) M(r, c) = m[static_cast<size_t>(3 * r + c)];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

CoefficientField sample_coefficients(const Grid& grid, const CoefficientSpec& spec) {
  CoefficientField f;
  f.dim = grid.dim;
  f.tri = grid.dim * (grid.dim + 1) / 2;

  // parse once
  std::array<Expr, 6> pexpr;
  std::array<bool, 6> phas{};
  {
    int t = 0;
    for (int r = 0; r < grid.dim; ++r)
      for (int c = r; c < grid.dim; ++c, ++t) {
        // principal[] is laid out c11,c12,c13,c22,c23,c33 for d=3 and
        // c11,c12,c22 for d=2 (same packing as pk())
        const std::string& s = spec.principal[static_cast<size_t>(pk(grid.dim, r, c))];
        if (!s.empty()) {
          pexpr[static_cast<size_t>(pk(grid.dim, r, c))] = Expr::parse(s, grid.dim);
          phas[static_cast<size_t>(pk(grid.dim, r, c))] = true;
        }
      }
    (void)t;
  }
  std::array<Expr, 3> dexpr;
  for (int a = 0; a < grid.dim; ++a)
    if (!spec.drift[static_cast<size_t>(a)].empty()) {
      dexpr[static_cast<size_t>(a)] = Expr::parse(spec.drift[static_cast<size_t>(a)], grid.dim);
      f.has_drift = true;
    }
  Expr zexpr;
  if (!spec.zero_order.empty()) {
    zexpr = Expr::parse(spec.zero_order, grid.dim);
    f.has_zero_order = true;
  }

  int nc = grid.interior_count();
  f.C.resize(static_cast<size_t>(nc) * f.tri);
  if (f.has_drift) f.c.assign(static_cast<size_t>(nc) * grid.dim, 0.0);
  if (f.has_zero_order) f.c0.assign(static_cast<size_t>(nc), 0.0);

  for (int32_t id = 0; id < nc; ++id) {
    auto x = grid.coords_of_interior(id);
    double* Cp = &f.C[static_cast<size_t>(id) * f.tri];
    for (int r = 0; r < grid.dim; ++r)
      for (int c = r; c < grid.dim; ++c) {
        int t = pk(grid.dim, r, c);
        double v;
        if (phas[static_cast<size_t>(t)]) v = pexpr[static_cast<size_t>(t)].eval(x);
        else v = (r == c) ? 1.0 : 0.0;  // identity default
        if (!std::isfinite(v))
          fail(ErrorCode::non_finite_coefficient,
               "c" + std::to_string(r + 1) + std::to_string(c + 1) + " is not finite at node " +
                   node_str(grid, id));
        Cp[t] = v;
      }
    if (f.has_drift)
      for (int a = 0; a < grid.dim; ++a) {
        double v = spec.drift[static_cast<size_t>(a)].empty()
                       ? 0.0
                       : dexpr[static_cast<size_t>(a)].eval(x);
        if (!std::isfinite(v))
          fail(ErrorCode::non_finite_coefficient,
               "c" + std::to_string(a + 1) + " (drift) is not finite at node " + node_str(grid, id));
        f.c[static_cast<size_t>(id) * grid.dim + a] = v;
      }
    if (f.has_zero_order) {
      double v = zexpr.eval(x);
      if (!std::isfinite(v))
        fail(ErrorCode::non_finite_coefficient,
             "c0 is not finite at node " + node_str(grid, id));
      f.c0[static_cast<size_t>(id)] = v;
    }

    // strict positive definiteness nodewise: leading principal minors > 0
    if (grid.dim == 1) {
      if (!(Cp[0] > 0))
        fail(ErrorCode::not_positive_definite,
             "c11 = " + std::to_string(Cp[0]) + " at node " + node_str(grid, id));
    } else if (grid.dim == 2) {
      double det = Cp[0] * Cp[2] - Cp[1] * Cp[1];
      if (!(Cp[0] > 0 && det > 0))
        fail(ErrorCode::not_positive_definite,
             "C not positive definite at node " + node_str(grid, id));
    } else {
      double d1 = Cp[0];
      double d2 = Cp[0] * Cp[3] - Cp[1] * Cp[1];
      double d3 = Cp[0] * (Cp[3] * Cp[5] - Cp[4] * Cp[4]) -
                  Cp[1] * (Cp[1] * Cp[5] - Cp[4] * Cp[2]) +
                  Cp[2] * (Cp[1] * Cp[4] - Cp[3] * Cp[2]);
      if (!(d1 > 0 && d2 > 0 && d3 > 0))
        fail(ErrorCode::not_positive_definite,
             "C not positive definite at node " + node_str(grid, id));
    }
  }
  return f;
}

} // namespace uniqlab
