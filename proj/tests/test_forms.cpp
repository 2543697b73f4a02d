#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "uniqlab/forms.hpp"

using namespace uniqlab;
using namespace testutil;

namespace {

double integral_gamma_sin2d() {
  // phi = sin(pi x) sin(pi y), C = I:
  // Gamma = pi^2 (cos^2 sin^2 + sin^2 cos^2), integral over (0,1)^2 = pi^2/2
  return M_PI * M_PI / 2.0;
}

} // namespace

TEST_CASE("gamma: linear coordinate function has unit energy density") {
  auto p = square(33);
  auto phi = sample(p.grid, [](const std::array<double, 3>& x) { return x[0]; });
  auto g = gamma(p.grid, p.field, phi);
  for (double v : g) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gamma: constants have zero energy density") {
  auto p = square(17);
  std::vector<double> phi(static_cast<size_t>(p.grid.interior_count()), 3.7);
  for (double v : gamma(p.grid, p.field, phi)) CHECK(v == 0.0);
}

TEST_CASE("gamma: c11=x^2 against the log derivative oracle") {
  // oracle: x^2 (d/dx ln x)^2 = 1 exactly; the centered difference sees
  // ln((x+h)/(x-h))/(2h) = 1/x * (1 + h^2/(3x^2) + ...), so the nodal error
  // away from 0 is O(h^2)
  auto err_at_half = [](int res) {
    auto p = interval(res, "x^2");
    auto phi = sample(p.grid, [](const std::array<double, 3>& x) { return std::log(x[0]); });
    auto g = gamma(p.grid, p.field, phi);
    double worst = 0;
    for (int id = 0; id < p.grid.interior_count(); ++id) {
      double x = p.grid.coords_of_interior(id)[0];
      if (x < 0.4 || x > 0.6) continue;
      worst = std::max(worst, std::fabs(g[static_cast<size_t>(id)] - 1.0));
    }
    return worst;
  };
  const double e1 = err_at_half(101);
  const double e2 = err_at_half(201);
  const double e4 = err_at_half(401);
  // leading error 2h^2/(3x^2) = 4.2e-4 at x = 0.4, h = 0.01
  CHECK(e1 < 5e-4);
  // halving h divides the error by about 4
  CHECK(e1 / e2 > 3.0);
  CHECK(e2 / e4 > 3.0);
  CHECK(e1 / e2 < 5.0);
}

TEST_CASE("assemble: neumann flavor, phi = x integrates Gamma exactly") {
  // boundary-extended node weights tile (0,1) exactly and the one-sided end
  // gradients of a linear function are still exact, so this is not just O(h^2)
  for (int res : {5, 33, 101}) {
    auto p = interval(res);
    auto f = assemble_form(p.grid, p.field, FormFlavor::neumann);
    auto phi = sample(p.grid, [](const std::array<double, 3>& x) { return x[0]; });
    CHECK(form_value(f, phi) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.mass.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("assemble: constants are neumann-null, dirichlet sees the boundary") {
  // 5-node grid on (0,1), h = 1/4, interior nodes 0.25 0.5 0.75, c(x) = x^2.
  // phi = 1 kills every difference, so only the extension-by-zero penalties
  // remain: node 0.25 misses its left neighbor, node 0.75 its right, both
  // carry the stretched weight 3h/2, and the penalty is w c / h^2:
  //   (3/8) * 0.0625 / 0.0625 + (3/8) * 0.5625 / 0.0625 = 0.375 + 3.375 = 3.75
  auto p = interval(5, "x^2");
  std::vector<double> one(static_cast<size_t>(p.grid.interior_count()), 1.0);
  auto fn = assemble_form(p.grid, p.field, FormFlavor::neumann);
  auto fd = assemble_form(p.grid, p.field, FormFlavor::dirichlet);
  CHECK(form_value(fn, one) == 0.0);
  CHECK(form_value(fd, one) == doctest::Approx(3.75).epsilon(1e-12));
}

TEST_CASE("assemble: neumann matrix annihilates constants exactly") {
  CoefficientSpec cs;
  cs.principal[0] = "1 + x^2";
  cs.principal[1] = "0.2";  // c12, exercises the cross stencil
  cs.principal[2] = "2 + y";
  auto p = square(21, cs);
  auto f = assemble_form(p.grid, p.field, FormFlavor::neumann);
  Eigen::VectorXd one = Eigen::VectorXd::Ones(p.grid.interior_count());
  CHECK((f.A * one).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("graph norm: frozen interval values") {
  auto p = interval(1001);
  std::vector<double> zero(static_cast<size_t>(p.grid.interior_count()), 0.0);
  std::vector<double> one(static_cast<size_t>(p.grid.interior_count()), 1.0);
  auto phi = sample(p.grid, [](const std::array<double, 3>& x) { return x[0]; });
  auto f = assemble_form(p.grid, p.field, FormFlavor::neumann);
  CHECK(graph_norm(f, zero) == 0.0);
  CHECK(graph_norm(f, one) == doctest::Approx(1.0).epsilon(1e-12));
  // sqrt(h(x) + int x^2) = sqrt(1 + 1/3); quadrature error O(h^2)
  CHECK(graph_norm(f, phi) == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-5));
}

TEST_CASE("forms are symmetric PSD and dirichlet dominates neumann") {
  CoefficientSpec cs;
  cs.principal[0] = "1 + x^2";
  cs.principal[1] = "0.3 * x * y";
  cs.principal[2] = "2 - x";
  auto p = square(25, cs);
  auto fn = assemble_form(p.grid, p.field, FormFlavor::neumann);
  auto fd = assemble_form(p.grid, p.field, FormFlavor::dirichlet);

  Eigen::SparseMatrix<double> asymN = Eigen::SparseMatrix<double>(fn.A.transpose()) - fn.A;
  Eigen::SparseMatrix<double> asymD = Eigen::SparseMatrix<double>(fd.A.transpose()) - fd.A;
  CHECK(asymN.coeffs().cwiseAbs().maxCoeff() == 0.0);
  CHECK(asymD.coeffs().cwiseAbs().maxCoeff() == 0.0);

  // the two flavors differ by a nonnegative diagonal
  Eigen::SparseMatrix<double> diff = fd.A - fn.A;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it) {
      if (it.row() != it.col()) CHECK(std::fabs(it.value()) == 0.0);
      else CHECK(it.value() >= 0.0);
    }

  for (unsigned seed = 0; seed < 10; ++seed) {
    auto phi = random_values(p.grid, seed);
    const double hn = form_value(fn, phi);
    const double hd = form_value(fd, phi);
    CHECK(hn >= -1e-10);
    CHECK(hd >= hn - 1e-10);
  }
}

TEST_CASE("flavors agree exactly on functions vanishing on collar(1)") {
  CoefficientSpec cs;
  cs.principal[0] = "1 + y";
  cs.principal[1] = "0.4";
  cs.principal[2] = "1 + x";
  auto p = square(19, cs);
  auto fn = assemble_form(p.grid, p.field, FormFlavor::neumann);
  auto fd = assemble_form(p.grid, p.field, FormFlavor::dirichlet);
  for (unsigned seed = 0; seed < 5; ++seed) {
    auto phi = zero_on_collar(p.grid, random_values(p.grid, 100 + seed));
    const double hn = form_value(fn, phi);
    const double hd = form_value(fd, phi);
    CHECK(hd == doctest::Approx(hn).epsilon(1e-14));
  }
}

TEST_CASE("unit contraction does not increase the form (diagonal C)") {
  auto clamp01 = [](std::vector<double> v) {
    for (auto& x : v) x = std::min(1.0, std::max(0.0, x));
    return v;
  };
  CoefficientSpec cs2;
  cs2.principal[0] = "1 + x^2";
  cs2.principal[2] = "2 + y";
  auto p1 = interval(47, "0.5 + x^2");
  auto p2 = square(21, cs2);
  for (auto* p : {&p1, &p2}) {
    for (auto flavor : {FormFlavor::neumann, FormFlavor::dirichlet}) {
      auto f = assemble_form(p->grid, p->field, flavor);
      for (unsigned seed = 0; seed < 20; ++seed) {
        auto phi = random_values(p->grid, 7 * seed + 1);
        const double before = form_value(f, phi);
        const double after = form_value(f, clamp01(phi));
        CHECK(after <= before * (1 + 1e-12) + 1e-12);
      }
    }
  }
}

TEST_CASE("ideal property: cutoff times bounded function stays controlled") {
  // h_D(eta phi) <= 2 ||phi||_inf^2 h_D(eta) + 2 sum Gamma(phi) eta^2 vol,
  // up to the O(h) midpoint-vs-node slack of the discrete product rule
  for (int res : {33, 65}) {
    auto p = square(res);
    auto eta = sample(p.grid, [](const std::array<double, 3>& x) {
      double m = std::max(std::fabs(x[0] - 0.5), std::fabs(x[1] - 0.5));
      return std::min(1.0, std::max(0.0, 1.8 - 4.0 * m));
    });
    auto phi = sample(p.grid, [](const std::array<double, 3>& x) {
      return std::sin(M_PI * x[0]) * std::cos(M_PI * x[1]) + 0.3;
    });
    double sup = 0;
    for (double v : phi) sup = std::max(sup, std::fabs(v));
    std::vector<double> prod(phi.size());
    for (size_t i = 0; i < phi.size(); ++i) prod[i] = eta[i] * phi[i];

    auto fd = assemble_form(p.grid, p.field, FormFlavor::dirichlet);
    auto gphi = gamma(p.grid, p.field, phi);
    double rhs = 2.0 * sup * sup * form_value(fd, eta);
    for (int id = 0; id < p.grid.interior_count(); ++id)
      rhs += 2.0 * gphi[static_cast<size_t>(id)] * eta[static_cast<size_t>(id)] *
             eta[static_cast<size_t>(id)] * p.grid.node_weight(id);
    CHECK(form_value(fd, prod) <= rhs * 1.05);
  }
}

TEST_CASE("refinement drives the form value to the Gamma integral") {
  double err[3];
  int k = 0;
  for (int res : {33, 65, 129}) {
    auto p = square(res);
    auto phi = sample(p.grid, [](const std::array<double, 3>& x) {
      return std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]);
    });
    auto f = assemble_form(p.grid, p.field, FormFlavor::neumann);
    err[k++] = std::fabs(form_value(f, phi) - integral_gamma_sin2d());
  }
  CHECK(err[1] < err[0]);
  CHECK(err[2] < err[1]);
  CHECK(err[2] < 0.02 * integral_gamma_sin2d());
}
