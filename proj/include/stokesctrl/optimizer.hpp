#pragma once
// Primal-dual active-set solver for the control-constrained boundary control
// problem: minimize 1/2 ||u - u_d||^2 + rho/2 |y - y_d|_1^2 over controls
// y in Q_h with ya <= y <= yb componentwise at the control vertices, subject
// to the discrete Stokes state equations for u = w + y, w in V_h.

#include <Eigen/Sparse>
#include <vector>

#include "stokesctrl/stokes.hpp"

namespace stokesctrl {

struct ControlProblemData {
  double rho = 1e-2;
  ControlBounds bounds;
  VecFn f;
  VecFn u_d;
  // gradient of the control target y_d, which enters the optimality system
  // only through a(y_d, .); empty callables mean grad y_d = 0
  VecFn grad_yd1, grad_yd2;
};

enum class ActiveState { Inactive, LowerActive, UpperActive };
using ActiveSets = std::vector<ActiveState>;  // parallel to spaces.control_dofs

struct PDASConfig {
  double c = 1.0;       // complementarity scaling in the set update
  int max_iter = 50;
  double tol = 1e-10;   // relative linear-solve residual bound
};

struct IterationRow {
  int iter = 0;
  int n_lower = 0, n_upper = 0;
  double stationarity = 0.0;
  double cost = 0.0;
};

struct OptimalSolution {
  Eigen::VectorXd w, y, u, phi;  // full vector-P1 layout
  Eigen::VectorXd p, r;          // coarse P0
  Eigen::VectorXd mu;            // control-constraint multiplier, per control DOF
  ActiveSets active;             // sets used in the final solve
  int iterations = 0;
  bool converged = false;
  double cost = 0.0;
  double stationarity = 0.0;     // scaled residual of the variational equation
  double linear_residual = 0.0;  // worst relative residual over the KKT solves
  double flux_multiplier = 0.0;  // zero-mean multiplier of the state equations
  std::vector<IterationRow> log;
};

// One symmetric saddle system for fixed active sets. Unknown blocks in order:
// w on free velocity DOFs, y on inactive control-space DOFs, p, lambda_p
// (zero-mean multiplier, if present), psi = -phi on free velocity DOFs,
// s = r, nu (zero-mean multiplier of the adjoint block, if present).
struct KKTSystem {
  SparseMatrix K;
  Eigen::VectorXd rhs;
  std::vector<int> q_in;     // inactive control-space DOFs, ascending
  Eigen::VectorXd y_fixed;   // full layout; active DOFs hold their bound value
  int o_w = 0, o_y = 0, o_p = 0, o_lp = -1, o_psi = 0, o_s = 0, o_nu = -1;
};

KKTSystem assemble_kkt(const ControlProblemData& data, const ActiveSets& active,
                       const FunctionSpaces& spaces, const StokesOperators& ops);

OptimalSolution pdas_solve(const ControlProblemData& data, const FunctionSpaces& spaces,
                           const StokesOperators& ops, const PDASConfig& cfg = {});

// Reference solver: enumerates all 3^m active-set assignments (m = number of
// scalar control DOFs, guarded to m <= 10), keeps the sign-feasible ones, and
// requires the survivor to be unique. Exercises the same linear solve as one
// PDAS iteration.
OptimalSolution brute_force_solve(const ControlProblemData& data,
                                  const FunctionSpaces& spaces,
                                  const StokesOperators& ops,
                                  const PDASConfig& cfg = {});

double evaluate_cost(const ControlProblemData& data, const FunctionSpaces& spaces,
                     const StokesOperators& ops, const Eigen::VectorXd& u_full,
                     const Eigen::VectorXd& y_full);

// Residual of the variational equation rho a(y - y_d, q) - a(phi, q)
// + b(q, r) + (u - u_d, q) - mu(q) = 0 over free control-space DOFs, in the
// sup norm, scaled by the data magnitude (absolute when the data vanish).
// Recomputed from the final fields, independent of the KKT solve.
double stationarity_residual(const OptimalSolution& sol, const ControlProblemData& data,
                             const FunctionSpaces& spaces, const StokesOperators& ops);

// Variational-inequality pairing mu^T (x - y) for a feasible comparison
// control given by its values on the control DOFs; throws
// std::invalid_argument when x violates the bounds. Nonnegative at the
// minimizer for every feasible x.
double vi_residual(const OptimalSolution& sol, const ControlProblemData& data,
                   const FunctionSpaces& spaces, const StokesOperators& ops,
                   const Eigen::VectorXd& x_ctrl);

// First-order optimality certificate assembled from scratch on the final
// fields: all quantities are scaled by the data magnitude where sensible.
struct OptimalityReport {
  double stationarity = 0.0;        // as stationarity_residual
  double max_bound_violation = 0.0; // over control DOFs
  double max_complementarity = 0.0; // mu+ |y - ya| and mu- |yb - y| products
  double sign_violation = 0.0;      // wrong-signed multiplier on active DOFs
  double divergence = 0.0;          // ||B u + lambda_p m||_inf
  double min_vi = 0.0;              // smallest sampled mu^T (x - y)
};
OptimalityReport check_optimality(const OptimalSolution& sol,
                                  const ControlProblemData& data,
                                  const FunctionSpaces& spaces,
                                  const StokesOperators& ops,
                                  int n_directions = 100, unsigned seed = 1234);

}  // namespace stokesctrl
