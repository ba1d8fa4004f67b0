#include "stokesctrl/stokes.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace stokesctrl {

StokesOperators assemble_operators(const FunctionSpaces& spaces, int quad_degree) {
  StokesOperators ops;
  ops.A = assemble_stiffness(spaces);
  ops.M = assemble_mass(spaces);
  ops.B = assemble_divergence(spaces);
  ops.marea = pressure_areas(spaces);
  ops.quad = triangle_quadrature(quad_degree);
  return ops;
}

namespace {

// full-velocity-DOF -> free-slot index, -1 when pinned
std::vector<int> free_slot_map(const FunctionSpaces& spaces) {
  std::vector<int> loc(spaces.n_vdofs, -1);
  for (int i = 0; i < static_cast<int>(spaces.v_free_idx.size()); ++i)
    loc[spaces.v_free_idx[i]] = i;
  return loc;
}

}  // namespace

SaddleSolver::SaddleSolver(const FunctionSpaces& spaces, const StokesOperators& ops,
                           double tol)
    : spaces_(spaces), ops_(ops), tol_(tol) {
  const int nvf = static_cast<int>(spaces.v_free_idx.size());
  const int np = spaces.n_pressure;
  const int n = nvf + np + (spaces.pressure_zero_mean ? 1 : 0);
  const std::vector<int> loc = free_slot_map(spaces);

  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < ops.A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(ops.A, k); it; ++it) {
      const int i = loc[it.row()], j = loc[it.col()];
      if (i >= 0 && j >= 0) trip.emplace_back(i, j, it.value());
    }
  for (int k = 0; k < ops.B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(ops.B, k); it; ++it) {
      const int j = loc[it.col()];
      if (j < 0) continue;
      trip.emplace_back(nvf + static_cast<int>(it.row()), j, it.value());
      trip.emplace_back(j, nvf + static_cast<int>(it.row()), it.value());
    }
  if (spaces.pressure_zero_mean)
    for (int k = 0; k < np; ++k) {
      trip.emplace_back(n - 1, nvf + k, ops.marea[k]);
      trip.emplace_back(nvf + k, n - 1, ops.marea[k]);
    }

  K_.resize(n, n);
  K_.setFromTriplets(trip.begin(), trip.end());
  K_.makeCompressed();
  lu_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
  lu_->compute(K_);
  if (lu_->info() != Eigen::Success)
    throw std::runtime_error("saddle-point factorization failed");
}

StokesSolution SaddleSolver::solve(const Eigen::VectorXd& rhs_v,
                                   const Eigen::VectorXd& rhs_p) const {
  const int nvf = static_cast<int>(spaces_.v_free_idx.size());
  const int np = spaces_.n_pressure;
  const int n = static_cast<int>(K_.rows());

  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < nvf; ++i) b[i] = rhs_v[spaces_.v_free_idx[i]];
  b.segment(nvf, np) = rhs_p;

  Eigen::VectorXd x = lu_->solve(b);
  x += lu_->solve(b - K_ * x);  // one step of iterative refinement
  const double res = (b - K_ * x).norm() / std::max(1.0, b.norm());
  if (!(res <= tol_))
    throw std::runtime_error("saddle-point solve residual " + std::to_string(res) +
                             " exceeds tolerance");

  StokesSolution sol;
  sol.velocity = Eigen::VectorXd::Zero(spaces_.n_vdofs);
  for (int i = 0; i < nvf; ++i) sol.velocity[spaces_.v_free_idx[i]] = x[i];
  sol.pressure = x.segment(nvf, np);
  sol.flux_multiplier = spaces_.pressure_zero_mean ? x[n - 1] : 0.0;
  sol.residual = res;
  return sol;
}

StokesSolution solve_state(const Eigen::VectorXd& y_full, const VecFn& f,
                           const FunctionSpaces& spaces, const StokesOperators& ops,
                           const SaddleSolver& solver) {
  const Eigen::VectorXd F = assemble_load(f, spaces, ops.quad);
  const Eigen::VectorXd rhs_v = F - ops.A * y_full;
  const Eigen::VectorXd rhs_p = -(ops.B * y_full);
  StokesSolution sol = solver.solve(rhs_v, rhs_p);
  sol.velocity += y_full;  // u = w + y
  return sol;
}

StokesSolution solve_adjoint(const Eigen::VectorXd& u_full, const VecFn& u_d,
                             const FunctionSpaces& spaces, const StokesOperators& ops,
                             const SaddleSolver& solver) {
  const Eigen::VectorXd rhs_v = ops.M * u_full - assemble_load(u_d, spaces, ops.quad);
  StokesSolution sol = solver.solve(rhs_v, Eigen::VectorXd::Zero(spaces.n_pressure));
  // the factored system carries s = -r
  sol.pressure = -sol.pressure;
  sol.flux_multiplier = -sol.flux_multiplier;
  return sol;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> project_state(
    const ExactCase& c, const FunctionSpaces& spaces, const StokesOperators& ops,
    const SaddleSolver& solver) {
  const Eigen::VectorXd rhs_v =
      assemble_load(c.f, spaces, ops.quad) -
      assemble_grad_load(c.grad_u1, c.grad_u2, spaces, ops.quad);
  // the exact state is divergence-free, so the constraint data vanishes
  StokesSolution sol = solver.solve(rhs_v, Eigen::VectorXd::Zero(spaces.n_pressure));
  return {sol.velocity, sol.pressure};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> project_adjoint(
    const ExactCase& c, const FunctionSpaces& spaces, const StokesOperators& ops,
    const SaddleSolver& solver) {
  const VecFn diff = [&c](double x, double y) {
    const Vec2 a = c.u(x, y), b = c.u_d(x, y);
    return Vec2{a.x - b.x, a.y - b.y};
  };
  const Eigen::VectorXd rhs_v = assemble_load(diff, spaces, ops.quad);
  StokesSolution sol = solver.solve(rhs_v, Eigen::VectorXd::Zero(spaces.n_pressure));
  return {sol.velocity, -sol.pressure};
}

namespace {

constexpr int kDenseGuard = 2000;  // free velocity DOFs

// sqrt of the smallest admissible eigenvalue of B A^{-1} B^T q = lambda Mp q
// with Mp = diag(areas); the constant-pressure mode is skipped when the
// pressure space carries the zero-mean constraint.
double infsup_from(const Eigen::MatrixXd& Bv, const Eigen::VectorXd& areas,
                   const Eigen::MatrixXd& Avv, bool skip_constant) {
  Eigen::LLT<Eigen::MatrixXd> llt(Avv);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("velocity stiffness is not SPD on the free DOFs");
  const Eigen::MatrixXd S = Bv * llt.solve(Bv.transpose());
  Eigen::MatrixXd Mp = Eigen::MatrixXd::Zero(areas.size(), areas.size());
  Mp.diagonal() = areas;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Mp);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("inf-sup eigensolve failed");
  const double lam = es.eigenvalues()[skip_constant ? 1 : 0];
  return std::sqrt(std::max(lam, 0.0));
}

Eigen::MatrixXd dense_free_stiffness(const FunctionSpaces& spaces,
                                     const StokesOperators& ops,
                                     const std::vector<int>& loc) {
  const int nvf = static_cast<int>(spaces.v_free_idx.size());
  Eigen::MatrixXd Avv = Eigen::MatrixXd::Zero(nvf, nvf);
  for (int k = 0; k < ops.A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(ops.A, k); it; ++it) {
      const int i = loc[it.row()], j = loc[it.col()];
      if (i >= 0 && j >= 0) Avv(i, j) = it.value();
    }
  return Avv;
}

}  // namespace

double infsup_estimate(const FunctionSpaces& spaces, const StokesOperators& ops) {
  const int nvf = static_cast<int>(spaces.v_free_idx.size());
  if (nvf > kDenseGuard)
    throw std::runtime_error("inf-sup estimate uses dense algebra; mesh too large");
  const std::vector<int> loc = free_slot_map(spaces);
  const Eigen::MatrixXd Avv = dense_free_stiffness(spaces, ops, loc);

  Eigen::MatrixXd Bv = Eigen::MatrixXd::Zero(spaces.n_pressure, nvf);
  for (int k = 0; k < ops.B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(ops.B, k); it; ++it) {
      const int j = loc[it.col()];
      if (j >= 0) Bv(it.row(), j) = it.value();
    }
  return infsup_from(Bv, ops.marea, Avv, spaces.pressure_zero_mean);
}

double infsup_estimate_fine_p0(const FunctionSpaces& spaces, const StokesOperators& ops) {
  const int nvf = static_cast<int>(spaces.v_free_idx.size());
  if (nvf > kDenseGuard)
    throw std::runtime_error("inf-sup estimate uses dense algebra; mesh too large");
  const std::vector<int> loc = free_slot_map(spaces);
  const Eigen::MatrixXd Avv = dense_free_stiffness(spaces, ops, loc);

  const TwoLevelMesh& mesh = *spaces.mesh;
  const auto geo = element_geometry(mesh);
  const int nt = static_cast<int>(mesh.tris.size());
  Eigen::MatrixXd Bf = Eigen::MatrixXd::Zero(nt, nvf);
  Eigen::VectorXd areas(nt);
  for (int t = 0; t < nt; ++t) {
    areas[t] = geo[t].area;
    for (int i = 0; i < 3; ++i) {
      const int v = mesh.tris[t][i];
      const double g[2] = {geo[t].grad[i].x, geo[t].grad[i].y};
      for (int c = 0; c < 2; ++c) {
        const int j = loc[2 * v + c];
        if (j >= 0) Bf(t, j) -= geo[t].area * g[c];
      }
    }
  }
  return infsup_from(Bf, areas, Avv, spaces.pressure_zero_mean);
}

}  // namespace stokesctrl
