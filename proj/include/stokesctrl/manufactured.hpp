#pragma once
// Closed-form exact solutions on the two computational domains, the derived
// data f = -lap(u) + grad p and u_d = u + lap(phi) + grad r, and the error /
// convergence-order bookkeeping for the study tables.

#include <vector>

#include "stokesctrl/assembly.hpp"
#include "stokesctrl/fespace.hpp"

namespace stokesctrl {

struct OptimalSolution;  // optimizer.hpp

// The control field y coincides with u (its boundary trace is the exact
// control), and the control shift y_d equals y; both enter only through the
// velocity closures below.
struct ExactCase {
  Domain domain;
  double rho;
  ControlBounds bounds;
  VecFn u, phi, f, u_d;
  ScalarFn p, r;
  // (d/dx, d/dy) of each velocity / adjoint-velocity component
  VecFn grad_u1, grad_u2, grad_phi1, grad_phi2;
};

ExactCase make_case(Domain domain);

struct ErrorRow {
  double h = 0, H = 0, spacing = 0;
  double err_u = 0, err_p = 0, err_phi = 0, err_r = 0, err_y = 0;
  double ord_u = 0, ord_p = 0, ord_phi = 0, ord_r = 0, ord_y = 0;
};

ErrorRow compute_errors(const OptimalSolution& sol, const ExactCase& c,
                        const FunctionSpaces& spaces, int quad_degree);
// fills the order columns; first row keeps order 0
void fill_eoc(std::vector<ErrorRow>& rows);

// ---- quadrature norms used by the error report and the test suites ----
// ||grad(g - u_h)|| with the exact gradient given per component
double h1_error(const FunctionSpaces& spaces, const QuadratureRule& quad,
                const Eigen::VectorXd& uh, const VecFn& grad1, const VecFn& grad2);
// ||g - u_h||_0 with exact values
double l2_error(const FunctionSpaces& spaces, const QuadratureRule& quad,
                const Eigen::VectorXd& uh, const VecFn& g);
double l2_norm(const FunctionSpaces& spaces, const QuadratureRule& quad,
               const Eigen::VectorXd& uh);
double h1_seminorm(const FunctionSpaces& spaces, const Eigen::VectorXd& uh);
// ||p - p_H||_0 after shifting the discrete mean to the exact mean
double pressure_error(const FunctionSpaces& spaces, const QuadratureRule& quad,
                      const Eigen::VectorXd& ph, const ScalarFn& p);
double field_h1_seminorm(const FunctionSpaces& spaces, const QuadratureRule& quad,
                         const VecFn& grad1, const VecFn& grad2);

}  // namespace stokesctrl
