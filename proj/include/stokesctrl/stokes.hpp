#pragma once
// State / adjoint Stokes saddle-point solves on the two-level pair, the
// discrete projections used as verification oracles, and the inf-sup
// measurement.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>

#include "stokesctrl/assembly.hpp"
#include "stokesctrl/manufactured.hpp"

namespace stokesctrl {

// Everything assembled once per mesh: stiffness A, vector mass M, two-level
// divergence B, coarse cell areas, and the quadrature rule for loads/norms.
struct StokesOperators {
  SparseMatrix A, M, B;
  Eigen::VectorXd marea;
  QuadratureRule quad;
};

StokesOperators assemble_operators(const FunctionSpaces& spaces, int quad_degree = 6);

struct StokesSolution {
  Eigen::VectorXd velocity;  // full vector-P1 layout, boundary data filled in
  Eigen::VectorXd pressure;  // coarse P0
  // multiplier of the zero-mean row; for the state solve it equals the
  // control's net outflow through the boundary divided by |Omega| (the
  // dropped q=const flux row), reported as a diagnostic
  double flux_multiplier = 0.0;
  double residual = 0.0;  // relative linear residual
};

// Shared direct factorization of [A_vv B_v^T; B_v 0] (with the zero-mean
// pressure augmentation when Gamma_N is empty); the state and adjoint systems
// on one mesh reuse a single instance.
class SaddleSolver {
 public:
  SaddleSolver(const FunctionSpaces& spaces, const StokesOperators& ops,
               double tol = 1e-10);
  // rhs_v in the full velocity layout (only free entries are read)
  StokesSolution solve(const Eigen::VectorXd& rhs_v, const Eigen::VectorXd& rhs_p) const;
  double tolerance() const { return tol_; }

 private:
  const FunctionSpaces& spaces_;
  const StokesOperators& ops_;
  double tol_;
  SparseMatrix K_;
  std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
};

// w_h in V_h with a(w,z) + b(z,p) = (f,z) - a(y,z), b(w,q) = -b(y,q);
// returns u_h = w_h + y_h and p_H
StokesSolution solve_state(const Eigen::VectorXd& y_full, const VecFn& f,
                           const FunctionSpaces& spaces, const StokesOperators& ops,
                           const SaddleSolver& solver);
// phi_h in V_h with a(z,phi) - b(z,r) = (u - u_d, z), b(phi,q) = 0; solved
// with the negated pressure unknown so the state factorization is reused
StokesSolution solve_adjoint(const Eigen::VectorXd& u_full, const VecFn& u_d,
                             const FunctionSpaces& spaces, const StokesOperators& ops,
                             const SaddleSolver& solver);

// Discrete Stokes projection of the exact state: same equations as
// solve_state but the continuous control enters the right-hand side through
// quadrature rather than through its interpolant. Returns (P_h w, R_H p).
std::pair<Eigen::VectorXd, Eigen::VectorXd> project_state(
    const ExactCase& c, const FunctionSpaces& spaces, const StokesOperators& ops,
    const SaddleSolver& solver);
// Adjoint analogue with exact (u - u_d) data; returns (Pbar_h phi, Rbar_H r).
std::pair<Eigen::VectorXd, Eigen::VectorXd> project_adjoint(
    const ExactCase& c, const FunctionSpaces& spaces, const StokesOperators& ops,
    const SaddleSolver& solver);

// beta_h = sqrt of the smallest nonzero eigenvalue of B A^{-1} B^T against
// the P0 pressure mass (the constant mode is skipped when Gamma_N is empty).
// Dense computation, guarded to small meshes.
double infsup_estimate(const FunctionSpaces& spaces, const StokesOperators& ops);
// Negative control: the same measurement with P0 pressure on the fine mesh
// (single-level pairing), which is unstable.
double infsup_estimate_fine_p0(const FunctionSpaces& spaces, const StokesOperators& ops);

}  // namespace stokesctrl
