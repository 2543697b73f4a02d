#include "uniqlab/forms.hpp"

#include <cmath>
#include <cstdint>

#include "uniqlab/errors.hpp"

namespace uniqlab {
namespace {

// gradient functional along one axis: phi -> sum coef[i] * phi[ids[i]],
// centered when both neighbors exist, one-sided at mask edges, zero when
// the node has no neighbor along the axis
struct GradStencil {
  int ids[2];
  double co[2];
  int n = 0;
};

GradStencil grad_stencil(const Grid& g, int id, int axis) {
  GradStencil s;
  const int L = g.neighbor(id, axis, -1);
  const int R = g.neighbor(id, axis, +1);
  const double h = g.h[axis];
  if (L >= 0 && R >= 0) {
    s.ids[0] = R; s.co[0] = 0.5 / h;
    s.ids[1] = L; s.co[1] = -0.5 / h;
    s.n = 2;
  } else if (R >= 0) {
    s.ids[0] = R; s.co[0] = 1.0 / h;
    s.ids[1] = id; s.co[1] = -1.0 / h;
    s.n = 2;
  } else if (L >= 0) {
    s.ids[0] = id; s.co[0] = 1.0 / h;
    s.ids[1] = L; s.co[1] = -1.0 / h;
    s.n = 2;
  }
  return s;
}

} // namespace

SparseForm assemble_form(const Grid& grid, const CoefficientField& field, FormFlavor flavor) {
  const int N = grid.interior_count();
  const int d = grid.dim;
  SparseForm form;
  form.flavor = flavor;
  form.mass.resize(N);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(N) * (4 * d + 1));

  auto add = [&trips](int r, int c, double v) {
    if (v != 0.0) trips.emplace_back(r, c, v);
  };

  for (int id = 0; id < N; ++id) {
    const double w = grid.node_weight(id);
    form.mass[id] = w;

    // diagonal part as half-edge fluxes; per node this equals
    // w * (sum_k c_kk g_k^2 + jump stabilization)
    for (int k = 0; k < d; ++k) {
      const double ckk = field.C_at(id)[pk(d, k, k)];
      const double h2 = grid.h[k] * grid.h[k];
      const int L = grid.neighbor(id, k, -1);
      const int R = grid.neighbor(id, k, +1);
      const bool two = (L >= 0 && R >= 0);
      const double q = w * ckk / ((two ? 2.0 : 1.0) * h2);
      for (int nb : {L, R}) {
        if (nb < 0) continue;
        add(id, id, q);
        add(nb, nb, q);
        add(id, nb, -q);
        add(nb, id, -q);
      }
      if (flavor == FormFlavor::dirichlet) {
        // extension by zero: ghost penalty per missing axis neighbor
        const int missing = (L < 0 ? 1 : 0) + (R < 0 ? 1 : 0);
        if (missing) add(id, id, missing * w * ckk / h2);
      }
    }

    // mixed terms 2 w c_kl g_k g_l, identical in both flavors
    for (int k = 0; k < d; ++k) {
      for (int l = k + 1; l < d; ++l) {
        const double ckl = field.C_at(id)[pk(d, k, l)];
        if (ckl == 0.0) continue;
        const GradStencil gk = grad_stencil(grid, id, k);
        const GradStencil gl = grad_stencil(grid, id, l);
        for (int a = 0; a < gk.n; ++a)
          for (int b = 0; b < gl.n; ++b)
            add(gk.ids[a], gl.ids[b], 2.0 * w * ckl * gk.co[a] * gl.co[b]);
      }
    }
  }

  Eigen::SparseMatrix<double> A(N, N);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseMatrix<double> At = A.transpose();
  form.A = 0.5 * (A + At);
  form.A.makeCompressed();
  return form;
}

std::vector<double> gamma(const Grid& grid, const CoefficientField& field,
                          const std::vector<double>& phi) {
  const int N = grid.interior_count();
  if (static_cast<int>(phi.size()) != N)
    fail(ErrorCode::dimension_mismatch, "gamma: field size mismatch");
  const int d = grid.dim;
  std::vector<double> out(N, 0.0);
  double g[3];
  for (int id = 0; id < N; ++id) {
    for (int k = 0; k < d; ++k) {
      const GradStencil s = grad_stencil(grid, id, k);
      double v = 0.0;
      for (int a = 0; a < s.n; ++a) v += s.co[a] * phi[s.ids[a]];
      g[k] = v;
    }
    double q = 0.0;
    for (int k = 0; k < d; ++k) {
      q += field.C_at(id)[pk(d, k, k)] * g[k] * g[k];
      for (int l = k + 1; l < d; ++l) q += 2.0 * field.C_at(id)[pk(d, k, l)] * g[k] * g[l];
    }
    out[id] = q;
  }
  return out;
}

double form_value(const SparseForm& form, const Eigen::VectorXd& phi) {
  return phi.dot(form.A * phi);
}

double form_value(const SparseForm& form, const std::vector<double>& phi) {
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(phi.data(), static_cast<long>(phi.size()));
  return form_value(form, v);
}

double graph_norm(const SparseForm& form, const std::vector<double>& phi) {
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(phi.data(), static_cast<long>(phi.size()));
  const double h = form_value(form, v);
  const double m = v.dot(form.mass.cwiseProduct(v));
  return std::sqrt(h + m);
}

double mass_inner(const SparseForm& form, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.dot(form.mass.cwiseProduct(b));
}

} // namespace uniqlab
