#pragma once
#include <Eigen/Sparse>
#include <vector>

#include "uniqlab/coefficients.hpp"
#include "uniqlab/grid.hpp"

namespace uniqlab {

// Discrete energy forms h(phi) = phi^T A phi over interior nodes.
//
// Assembly: per node, the quadratic form w(x) * g^T C(x) g with g the
// centered difference gradient (one-sided at mask edges) plus a per-axis
// jump stabilization; away from mask edges this regroups exactly into the
// edge flux stencil with midpoint-averaged diagonal coefficients plus
// centered cross-difference terms for c_kl, k != l.  A is positive
// semidefinite by construction and annihilates constants in the neumann
// flavor.
//
// dirichlet flavor = neumann matrix + ghost-edge penalties
// w(x) c_kk(x) (phi_x / h_k)^2 per missing axis neighbor (extension by
// zero; the coefficient is taken one-sidedly at the node, values are never
// sampled on the boundary itself).  Consequences used by the tests:
// dirichlet - neumann is a nonnegative diagonal, and both flavors agree
// exactly on functions vanishing on collar(1).
//
// Contractions (unit clamp, level truncation) decrease these forms exactly
// when C is diagonal (every edge term contracts individually); with
// off-diagonal c_kl the cross-difference terms are only approximately
// monotone.
enum class FormFlavor { dirichlet, neumann };

struct SparseForm {
  FormFlavor flavor = FormFlavor::neumann;
  Eigen::SparseMatrix<double> A;  // interior x interior, symmetric PSD
  Eigen::VectorXd mass;           // per-node quadrature weights
};

SparseForm assemble_form(const Grid& grid, const CoefficientField& field, FormFlavor flavor);

// carré du champ Gamma(phi)(x) = sum_kl c_kl d_k phi d_l phi, nodal values
// with the same centered/one-sided gradient the form assembly uses
std::vector<double> gamma(const Grid& grid, const CoefficientField& field,
                          const std::vector<double>& phi);

double form_value(const SparseForm& form, const Eigen::VectorXd& phi);
double form_value(const SparseForm& form, const std::vector<double>& phi);
// sqrt(h(phi) + ||phi||_2^2), the D(h) graph norm
double graph_norm(const SparseForm& form, const std::vector<double>& phi);

double mass_inner(const SparseForm& form, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

} // namespace uniqlab
