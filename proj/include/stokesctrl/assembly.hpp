#pragma once
// Operators of the two-level discretization: vector P1 stiffness and mass on
// the fine mesh, the divergence coupling b(z,q) = -int q div z with P0
// pressures on the coarse mesh, quadrature loads.

#include <Eigen/Sparse>

#include "stokesctrl/fespace.hpp"

namespace stokesctrl {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Symmetric positive-weight rule in barycentric coordinates; weights sum to 1,
// so integral over a triangle T = area(T) * sum_q w_q f(x_q).
struct QuadratureRule {
  int degree;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};

// degree in {1, 2, 4, 6, 8}; the degree-6 rule (12 points) is the default for
// loads and error norms
QuadratureRule triangle_quadrature(int degree);

SparseMatrix assemble_stiffness(const FunctionSpaces& spaces);
SparseMatrix assemble_mass(const FunctionSpaces& spaces);
// rows: coarse cells, cols: fine vector-P1 DOFs; entry = -sum over fine
// children of area * d(basis)/dx_c
SparseMatrix assemble_divergence(const FunctionSpaces& spaces);
Eigen::VectorXd assemble_load(const VecFn& f, const FunctionSpaces& spaces,
                              const QuadratureRule& quad);
// a(g, basis) for a field given by the gradients of its two components:
// grad1(x,y) = (d g1/dx, d g1/dy), grad2 likewise
Eigen::VectorXd assemble_grad_load(const VecFn& grad1, const VecFn& grad2,
                                   const FunctionSpaces& spaces,
                                   const QuadratureRule& quad);
// coarse cell areas (the P0 mass diagonal and the zero-mean constraint row)
Eigen::VectorXd pressure_areas(const FunctionSpaces& spaces);

// largest |K - K^T| entry; assembly asserts <= 1e-13 * max|K| for the
// symmetric operators
double symmetry_defect(const SparseMatrix& K);

// coordinate-format debug dump: row col value per line
void dump_operator(std::ostream& out, const SparseMatrix& K);

}  // namespace stokesctrl
