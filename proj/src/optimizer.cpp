#include "stokesctrl/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace stokesctrl {

namespace {

struct Loads {
  Eigen::VectorXd F, Ud, Ad;
};

Loads make_loads(const ControlProblemData& data, const FunctionSpaces& spaces,
                 const StokesOperators& ops) {
  Loads L;
  L.F = assemble_load(data.f, spaces, ops.quad);
  L.Ud = assemble_load(data.u_d, spaces, ops.quad);
  L.Ad = (data.grad_yd1 && data.grad_yd2)
             ? assemble_grad_load(data.grad_yd1, data.grad_yd2, spaces, ops.quad)
             : Eigen::VectorXd::Zero(spaces.n_vdofs);
  return L;
}

double data_scale(const ControlProblemData& data, const Loads& L) {
  const double s = std::max(L.Ud.lpNorm<Eigen::Infinity>(),
                            data.rho * L.Ad.lpNorm<Eigen::Infinity>());
  return s > 0.0 ? s : 1.0;
}

KKTSystem assemble_kkt_impl(const ControlProblemData& data, const ActiveSets& active,
                            const FunctionSpaces& spaces, const StokesOperators& ops,
                            const Loads& L) {
  const int nvf = static_cast<int>(spaces.v_free_idx.size());
  const int np = spaces.n_pressure;
  const bool zm = spaces.pressure_zero_mean;
  const int m = static_cast<int>(spaces.control_dofs.size());
  if (static_cast<int>(active.size()) != m)
    throw std::invalid_argument("active-set size does not match control DOFs");

  KKTSystem sys;
  sys.y_fixed = Eigen::VectorXd::Zero(spaces.n_vdofs);
  std::vector<char> fixed(spaces.n_vdofs, 0);
  for (int k = 0; k < m; ++k) {
    if (active[k] == ActiveState::Inactive) continue;
    const int dof = spaces.control_dofs[k];
    const int comp = dof % 2;
    const double bound = active[k] == ActiveState::LowerActive ? data.bounds.ya[comp]
                                                               : data.bounds.yb[comp];
    if (!std::isfinite(bound))
      throw std::invalid_argument("active set pins a control DOF at an infinite bound");
    fixed[dof] = 1;
    sys.y_fixed[dof] = bound;
  }
  for (int dof : spaces.q_free_idx)
    if (!fixed[dof]) sys.q_in.push_back(dof);
  const int nq = static_cast<int>(sys.q_in.size());

  sys.o_w = 0;
  sys.o_y = nvf;
  sys.o_p = nvf + nq;
  sys.o_lp = zm ? sys.o_p + np : -1;
  sys.o_psi = sys.o_p + np + (zm ? 1 : 0);
  sys.o_s = sys.o_psi + nvf;
  sys.o_nu = zm ? sys.o_s + np : -1;
  const int n = sys.o_s + np + (zm ? 1 : 0);

  std::vector<int> loc_v(spaces.n_vdofs, -1), loc_q(spaces.n_vdofs, -1);
  for (int i = 0; i < nvf; ++i) loc_v[spaces.v_free_idx[i]] = i;
  for (int k = 0; k < nq; ++k) loc_q[sys.q_in[k]] = k;

  std::vector<Eigen::Triplet<double>> trip;
  auto add = [&trip](int i, int j, double v) { trip.emplace_back(i, j, v); };

  for (int k = 0; k < ops.M.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(ops.M, k); it; ++it) {
      const int iv = loc_v[it.row()], iq = loc_q[it.row()];
      const int jv = loc_v[it.col()], jq = loc_q[it.col()];
      const double v = it.value();
      if (iv >= 0 && jv >= 0) add(sys.o_w + iv, sys.o_w + jv, v);
      if (iv >= 0 && jq >= 0) add(sys.o_w + iv, sys.o_y + jq, v);
      if (iq >= 0 && jv >= 0) add(sys.o_y + iq, sys.o_w + jv, v);
      if (iq >= 0 && jq >= 0) add(sys.o_y + iq, sys.o_y + jq, v);
    }
  for (int k = 0; k < ops.A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(ops.A, k); it; ++it) {
      const int iv = loc_v[it.row()], iq = loc_q[it.row()];
      const int jv = loc_v[it.col()], jq = loc_q[it.col()];
      const double v = it.value();
      if (iq >= 0 && jq >= 0) add(sys.o_y + iq, sys.o_y + jq, data.rho * v);
      if (iv >= 0 && jv >= 0) {
        add(sys.o_w + iv, sys.o_psi + jv, v);
        add(sys.o_psi + iv, sys.o_w + jv, v);
      }
      if (iq >= 0 && jv >= 0) add(sys.o_y + iq, sys.o_psi + jv, v);
      if (iv >= 0 && jq >= 0) add(sys.o_psi + iv, sys.o_y + jq, v);
    }
  for (int k = 0; k < ops.B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(ops.B, k); it; ++it) {
      const int K = static_cast<int>(it.row());
      const int jv = loc_v[it.col()], jq = loc_q[it.col()];
      const double v = it.value();
      if (jv >= 0) {
        add(sys.o_w + jv, sys.o_s + K, v);
        add(sys.o_s + K, sys.o_w + jv, v);
        add(sys.o_psi + jv, sys.o_p + K, v);
        add(sys.o_p + K, sys.o_psi + jv, v);
      }
      if (jq >= 0) {
        add(sys.o_y + jq, sys.o_s + K, v);
        add(sys.o_s + K, sys.o_y + jq, v);
      }
    }
  if (zm)
    for (int K = 0; K < np; ++K) {
      add(sys.o_p + K, sys.o_nu, ops.marea[K]);
      add(sys.o_nu, sys.o_p + K, ops.marea[K]);
      add(sys.o_lp, sys.o_s + K, ops.marea[K]);
      add(sys.o_s + K, sys.o_lp, ops.marea[K]);
    }

  sys.K.resize(n, n);
  sys.K.setFromTriplets(trip.begin(), trip.end());
  sys.K.makeCompressed();

  // right-hand side; the fixed part of the control moves to the data
  sys.rhs = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd My = ops.M * sys.y_fixed;
  const Eigen::VectorXd Ay = ops.A * sys.y_fixed;
  const Eigen::VectorXd By = ops.B * sys.y_fixed;
  for (int i = 0; i < nvf; ++i) {
    const int d = spaces.v_free_idx[i];
    sys.rhs[sys.o_w + i] = L.Ud[d] - My[d];
    sys.rhs[sys.o_psi + i] = L.F[d] - Ay[d];
  }
  for (int k = 0; k < nq; ++k) {
    const int d = sys.q_in[k];
    sys.rhs[sys.o_y + k] = L.Ud[d] + data.rho * L.Ad[d] - My[d] - data.rho * Ay[d];
  }
  for (int K = 0; K < np; ++K) sys.rhs[sys.o_s + K] = -By[K];
  return sys;
}

bool try_solve(const KKTSystem& sys, double tol, Eigen::VectorXd& x, double& res) {
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(sys.K);
  if (lu.info() != Eigen::Success) return false;
  x = lu.solve(sys.rhs);
  x += lu.solve(sys.rhs - sys.K * x);  // one step of iterative refinement
  res = (sys.rhs - sys.K * x).norm() / std::max(1.0, sys.rhs.norm());
  return res <= tol;
}

// scatters one KKT solution into the physical fields
void extract_fields(const KKTSystem& sys, const Eigen::VectorXd& x,
                    const FunctionSpaces& spaces, OptimalSolution& sol) {
  const int nvf = static_cast<int>(spaces.v_free_idx.size());
  const int np = spaces.n_pressure;
  sol.w = Eigen::VectorXd::Zero(spaces.n_vdofs);
  sol.phi = Eigen::VectorXd::Zero(spaces.n_vdofs);
  for (int i = 0; i < nvf; ++i) {
    const int d = spaces.v_free_idx[i];
    sol.w[d] = x[sys.o_w + i];
    sol.phi[d] = -x[sys.o_psi + i];  // the symmetric system carries psi = -phi
  }
  sol.y = sys.y_fixed;
  for (int k = 0; k < static_cast<int>(sys.q_in.size()); ++k)
    sol.y[sys.q_in[k]] = x[sys.o_y + k];
  sol.u = sol.w + sol.y;
  sol.p = x.segment(sys.o_p, np);
  sol.r = x.segment(sys.o_s, np);
  sol.flux_multiplier = sys.o_lp >= 0 ? x[sys.o_lp] : 0.0;
}

Eigen::VectorXd stationarity_vec(const OptimalSolution& sol, const StokesOperators& ops,
                                 const Loads& L, double rho) {
  return rho * (ops.A * sol.y - L.Ad) - ops.A * sol.phi +
         ops.B.transpose() * sol.r + ops.M * sol.u - L.Ud;
}

double scaled_stationarity(const Eigen::VectorXd& stat, const Eigen::VectorXd& mu,
                           const FunctionSpaces& spaces, double scale) {
  std::vector<int> ctrl_index(spaces.n_vdofs, -1);
  for (int k = 0; k < static_cast<int>(spaces.control_dofs.size()); ++k)
    ctrl_index[spaces.control_dofs[k]] = k;
  double worst = 0.0;
  for (int d : spaces.q_free_idx) {
    const double expected = ctrl_index[d] >= 0 ? mu[ctrl_index[d]] : 0.0;
    worst = std::max(worst, std::abs(stat[d] - expected));
  }
  return worst / scale;
}

ActiveSets next_active_sets(const OptimalSolution& sol, const ControlProblemData& data,
                            const FunctionSpaces& spaces, double c) {
  const int m = static_cast<int>(spaces.control_dofs.size());
  ActiveSets next(m, ActiveState::Inactive);
  for (int k = 0; k < m; ++k) {
    const int dof = spaces.control_dofs[k];
    const int comp = dof % 2;
    const double yk = sol.y[dof], muk = sol.mu[k];
    if (muk + c * (data.bounds.ya[comp] - yk) > 0.0)
      next[k] = ActiveState::LowerActive;
    else if (muk + c * (data.bounds.yb[comp] - yk) < 0.0)
      next[k] = ActiveState::UpperActive;
  }
  return next;
}

// completes the solution record for the sets in `active`; returns false when
// the linear system is singular or the solve is inaccurate
bool solve_kkt_once(const ControlProblemData& data, const ActiveSets& active,
                    const FunctionSpaces& spaces, const StokesOperators& ops,
                    const Loads& L, double tol, OptimalSolution& sol) {
  const KKTSystem sys = assemble_kkt_impl(data, active, spaces, ops, L);
  Eigen::VectorXd x;
  double res = 0.0;
  if (!try_solve(sys, tol, x, res)) return false;
  extract_fields(sys, x, spaces, sol);
  const Eigen::VectorXd stat = stationarity_vec(sol, ops, L, data.rho);
  const int m = static_cast<int>(spaces.control_dofs.size());
  sol.mu.resize(m);
  for (int k = 0; k < m; ++k) sol.mu[k] = stat[spaces.control_dofs[k]];
  sol.active = active;
  sol.stationarity = scaled_stationarity(stat, sol.mu, spaces, data_scale(data, L));
  sol.linear_residual = std::max(sol.linear_residual, res);
  sol.cost = evaluate_cost(data, spaces, ops, sol.u, sol.y);
  return true;
}

}  // namespace

KKTSystem assemble_kkt(const ControlProblemData& data, const ActiveSets& active,
                       const FunctionSpaces& spaces, const StokesOperators& ops) {
  return assemble_kkt_impl(data, active, spaces, ops, make_loads(data, spaces, ops));
}

OptimalSolution pdas_solve(const ControlProblemData& data, const FunctionSpaces& spaces,
                           const StokesOperators& ops, const PDASConfig& cfg) {
  data.bounds.validate(spaces.has_dirichlet);
  const Loads L = make_loads(data, spaces, ops);
  const int m = static_cast<int>(spaces.control_dofs.size());

  OptimalSolution sol;
  ActiveSets active(m, ActiveState::Inactive);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    if (!solve_kkt_once(data, active, spaces, ops, L, cfg.tol, sol))
      throw std::runtime_error("optimality system solve failed at iteration " +
                               std::to_string(it));
    sol.iterations = it;
    int nl = 0, nu = 0;
    for (ActiveState s : active) {
      nl += s == ActiveState::LowerActive;
      nu += s == ActiveState::UpperActive;
    }
    sol.log.push_back({it, nl, nu, sol.stationarity, sol.cost});

    const ActiveSets next = next_active_sets(sol, data, spaces, cfg.c);
    if (next == active) {
      sol.converged = true;
      break;
    }
    active = next;
  }
  return sol;
}

OptimalSolution brute_force_solve(const ControlProblemData& data,
                                  const FunctionSpaces& spaces,
                                  const StokesOperators& ops, const PDASConfig& cfg) {
  data.bounds.validate(spaces.has_dirichlet);
  const int m = static_cast<int>(spaces.control_dofs.size());
  if (m > 10)
    throw std::runtime_error("brute-force enumeration guarded to <= 10 control DOFs, got " +
                             std::to_string(m));
  const Loads L = make_loads(data, spaces, ops);

  long total = 1;
  for (int k = 0; k < m; ++k) total *= 3;

  constexpr double kSignTol = 1e-10;
  OptimalSolution winner;
  long n_feasible = 0;
  for (long code = 0; code < total; ++code) {
    ActiveSets active(m, ActiveState::Inactive);
    bool representable = true;
    long rest = code;
    for (int k = 0; k < m; ++k, rest /= 3) {
      const int digit = static_cast<int>(rest % 3);
      if (digit == 0) continue;
      active[k] = digit == 1 ? ActiveState::LowerActive : ActiveState::UpperActive;
      const int comp = spaces.control_dofs[k] % 2;
      const double bound =
          digit == 1 ? data.bounds.ya[comp] : data.bounds.yb[comp];
      if (!std::isfinite(bound)) representable = false;  // cannot pin at infinity
    }
    if (!representable) continue;

    OptimalSolution cand;
    if (!solve_kkt_once(data, active, spaces, ops, L, cfg.tol, cand)) continue;

    bool feasible = true;
    for (int k = 0; k < m && feasible; ++k) {
      const int dof = spaces.control_dofs[k];
      const int comp = dof % 2;
      switch (active[k]) {
        case ActiveState::Inactive:
          feasible = cand.y[dof] >= data.bounds.ya[comp] - kSignTol &&
                     cand.y[dof] <= data.bounds.yb[comp] + kSignTol;
          break;
        case ActiveState::LowerActive:
          feasible = cand.mu[k] > kSignTol;
          break;
        case ActiveState::UpperActive:
          feasible = cand.mu[k] < -kSignTol;
          break;
      }
    }
    if (!feasible) continue;

    ++n_feasible;
    cand.iterations = 1;
    cand.converged = true;
    winner = cand;
  }
  if (n_feasible != 1)
    throw std::runtime_error("brute-force enumeration found " +
                             std::to_string(n_feasible) +
                             " sign-feasible active-set assignments, expected 1");
  return winner;
}

double evaluate_cost(const ControlProblemData& data, const FunctionSpaces& spaces,
                     const StokesOperators& ops, const Eigen::VectorXd& u_full,
                     const Eigen::VectorXd& y_full) {
  const double track = l2_error(spaces, ops.quad, u_full, data.u_d);
  const double reg = (data.grad_yd1 && data.grad_yd2)
                         ? h1_error(spaces, ops.quad, y_full, data.grad_yd1, data.grad_yd2)
                         : h1_seminorm(spaces, y_full);
  return 0.5 * track * track + 0.5 * data.rho * reg * reg;
}

double stationarity_residual(const OptimalSolution& sol, const ControlProblemData& data,
                             const FunctionSpaces& spaces, const StokesOperators& ops) {
  const Loads L = make_loads(data, spaces, ops);
  const Eigen::VectorXd stat = stationarity_vec(sol, ops, L, data.rho);
  return scaled_stationarity(stat, sol.mu, spaces, data_scale(data, L));
}

double vi_residual(const OptimalSolution& sol, const ControlProblemData& data,
                   const FunctionSpaces& spaces, const StokesOperators& ops,
                   const Eigen::VectorXd& x_ctrl) {
  (void)ops;
  const int m = static_cast<int>(spaces.control_dofs.size());
  if (static_cast<int>(x_ctrl.size()) != m)
    throw std::invalid_argument("comparison control has wrong size");
  constexpr double kFeasTol = 1e-12;
  for (int k = 0; k < m; ++k) {
    const int comp = spaces.control_dofs[k] % 2;
    if (x_ctrl[k] < data.bounds.ya[comp] - kFeasTol ||
        x_ctrl[k] > data.bounds.yb[comp] + kFeasTol)
      throw std::invalid_argument("comparison control violates the bounds");
  }
  double v = 0.0;
  for (int k = 0; k < m; ++k)
    v += sol.mu[k] * (x_ctrl[k] - sol.y[spaces.control_dofs[k]]);
  return v;
}

OptimalityReport check_optimality(const OptimalSolution& sol,
                                  const ControlProblemData& data,
                                  const FunctionSpaces& spaces,
                                  const StokesOperators& ops, int n_directions,
                                  unsigned seed) {
  const Loads L = make_loads(data, spaces, ops);
  const double scale = data_scale(data, L);
  const Eigen::VectorXd stat = stationarity_vec(sol, ops, L, data.rho);
  const int m = static_cast<int>(spaces.control_dofs.size());

  OptimalityReport rep;
  rep.stationarity = scaled_stationarity(stat, sol.mu, spaces, scale);

  for (int k = 0; k < m; ++k) {
    const int dof = spaces.control_dofs[k];
    const int comp = dof % 2;
    const double yk = sol.y[dof], muk = sol.mu[k];
    const double lo = data.bounds.ya[comp], hi = data.bounds.yb[comp];
    rep.max_bound_violation =
        std::max({rep.max_bound_violation, lo - yk, yk - hi});

    const double mu_lo = std::max(muk, 0.0), mu_hi = std::max(-muk, 0.0);
    const double gap_lo = std::isfinite(lo) ? std::abs(yk - lo) : 1.0;
    const double gap_hi = std::isfinite(hi) ? std::abs(hi - yk) : 1.0;
    rep.max_complementarity =
        std::max(rep.max_complementarity, (mu_lo * gap_lo + mu_hi * gap_hi) / scale);

    if (sol.active[k] == ActiveState::LowerActive)
      rep.sign_violation = std::max(rep.sign_violation, -muk / scale);
    if (sol.active[k] == ActiveState::UpperActive)
      rep.sign_violation = std::max(rep.sign_violation, muk / scale);
  }

  Eigen::VectorXd dres = ops.B * sol.u;
  if (spaces.pressure_zero_mean) dres += sol.flux_multiplier * ops.marea;
  rep.divergence = dres.lpNorm<Eigen::Infinity>();

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double vi_min = std::numeric_limits<double>::infinity();
  for (int d = 0; d < n_directions; ++d) {
    Eigen::VectorXd x(m);
    for (int k = 0; k < m; ++k) {
      const int dof = spaces.control_dofs[k];
      const int comp = dof % 2;
      const double lo = std::isfinite(data.bounds.ya[comp]) ? data.bounds.ya[comp]
                                                            : sol.y[dof] - 1.0;
      const double hi = std::isfinite(data.bounds.yb[comp]) ? data.bounds.yb[comp]
                                                            : sol.y[dof] + 1.0;
      x[k] = lo + unif(rng) * (hi - lo);
    }
    vi_min = std::min(vi_min, vi_residual(sol, data, spaces, ops, x));
  }
  rep.min_vi = n_directions > 0 ? vi_min : 0.0;
  return rep;
}

}  // namespace stokesctrl
