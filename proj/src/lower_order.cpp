#include "uniqlab/lower_order.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "uniqlab/errors.hpp"

namespace uniqlab {
namespace {

// centered/one-sided difference of a per-node scalar accessor
template <class F>
double diff_along(const Grid& g, int32_t id, int axis, F&& value) {
  const int32_t L = g.neighbor(id, axis, -1);
  const int32_t R = g.neighbor(id, axis, +1);
  const double h = g.h[static_cast<size_t>(axis)];
  if (L >= 0 && R >= 0) return (value(R) - value(L)) / (2 * h);
  if (R >= 0) return (value(R) - value(id)) / h;
  if (L >= 0) return (value(id) - value(L)) / h;
  return 0.0;
}

} // namespace

std::vector<double> divergence(const Grid& grid, const CoefficientField& field) {
  std::vector<double> div(static_cast<size_t>(grid.interior_count()), 0.0);
  if (!field.has_drift) return div;
  for (int32_t id = 0; id < grid.interior_count(); ++id) {
    double v = 0;
    for (int k = 0; k < grid.dim; ++k)
      v += diff_along(grid, id, k, [&](int32_t nb) { return field.drift_at(nb, k); });
    div[static_cast<size_t>(id)] = v;
  }
  return div;
}

LowerOrderBounds compute_bounds(const Grid& grid, const CoefficientField& field) {
  LowerOrderBounds b;
  for (int f = 0; f < 2 * grid.dim; ++f)
    if (grid.truncation[static_cast<size_t>(f)]) b.window_limited = true;

  b.omega0 = 0;
  if (field.has_zero_order) {
    b.omega0 = std::numeric_limits<double>::infinity();
    for (int32_t id = 0; id < grid.interior_count(); ++id)
      b.omega0 = std::min(b.omega0, field.zero_at(id));
  }

  b.omega1 = 0;
  if (field.has_drift) {
    auto div = divergence(grid, field);
    b.omega1 = -std::numeric_limits<double>::infinity();
    for (double v : div) b.omega1 = std::max(b.omega1, v);
  }

  b.kappa_max = std::numeric_limits<double>::infinity();
  b.kappa_argmin = -1;
  if (field.has_drift) {
    const int d = grid.dim;
    for (int32_t id = 0; id < grid.interior_count(); ++id) {
      Eigen::Vector3d c = Eigen::Vector3d::Zero();
      double norm2 = 0;
      for (int k = 0; k < d; ++k) {
        c[k] = field.drift_at(id, k);
        norm2 += c[k] * c[k];
      }
      if (norm2 == 0) continue;
      // kappa(x) = 1 / (c^T C^{-1} c); rank-one ordering criterion
      auto Cm = field.C_mat(id);
      Eigen::Matrix3d C = Eigen::Map<Eigen::Matrix3d>(Cm.data());
      for (int k = d; k < 3; ++k) C(k, k) = 1;  // padding, c is zero there
      const double q = c.dot(C.ldlt().solve(c));
      if (!(q > 0)) fail(ErrorCode::not_positive_definite, "drift quadratic form not positive");
      const double kappa = 1.0 / q;
      if (kappa < b.kappa_max) {
        b.kappa_max = kappa;
        b.kappa_argmin = id;
      }
    }
  }

  b.omega = b.omega0 - 0.5 * b.omega1;
  b.c0_lower = std::isfinite(b.omega0);
  b.divc_upper = std::isfinite(b.omega1);
  b.matrix_order = b.kappa_max > 0;
  return b;
}

double accretivity_shift(const LowerOrderBounds& bounds) {
  if (!(bounds.kappa_max > 0))
    fail(ErrorCode::kappa_zero, "matrix-order condition fails, no sectorial shift exists");
  const double inv = std::isinf(bounds.kappa_max) ? 0.0 : 1.0 / (4.0 * bounds.kappa_max);
  return std::max(0.0, inv - bounds.omega);
}

double drift_energy(const Grid& grid, const CoefficientField& field,
                    const std::vector<double>& phi) {
  if (!field.has_drift) return 0.0;
  double total = 0;
  for (int32_t id = 0; id < grid.interior_count(); ++id) {
    double adv = 0;
    for (int k = 0; k < grid.dim; ++k)
      adv += field.drift_at(id, k) *
             diff_along(grid, id, k, [&](int32_t nb) { return phi[static_cast<size_t>(nb)]; });
    total += grid.node_weight(id) * adv * adv;
  }
  return total;
}

} // namespace uniqlab
