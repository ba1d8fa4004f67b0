#include <cmath>
#include <random>

#include "doctest.h"
#include "stokesctrl/optimizer.hpp"

using namespace stokesctrl;

namespace {

struct Setup {
  TwoLevelMesh mesh;
  BoundaryInfo binfo;
  FunctionSpaces spaces;
  StokesOperators ops;
};

Setup make(Domain dom, int n) {
  Setup s;
  s.mesh = refine_red(build_coarse(dom, n));
  s.binfo = classify_boundary(s.mesh);
  s.spaces = build_spaces(s.mesh, s.binfo);
  s.ops = assemble_operators(s.spaces);
  return s;
}

ControlProblemData problem_for(const ExactCase& c) {
  ControlProblemData d;
  d.rho = c.rho;
  d.bounds = c.bounds;
  d.f = c.f;
  d.u_d = c.u_d;
  d.grad_yd1 = c.grad_u1;  // the control target is the exact velocity
  d.grad_yd2 = c.grad_u2;
  return d;
}

// control-DOF index of (vertex at (x,y), component), -1 when absent
int control_index(const Setup& s, double x, double y, int comp) {
  for (size_t k = 0; k < s.spaces.control_dofs.size(); ++k) {
    const int dof = s.spaces.control_dofs[k];
    if (dof % 2 != comp) continue;
    const Vec2 p = s.mesh.verts[dof / 2];
    if (std::abs(p.x - x) < 1e-12 && std::abs(p.y - y) < 1e-12)
      return static_cast<int>(k);
  }
  return -1;
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("kkt system is symmetric") {
  const Setup s = make(Domain::UnitSquare, 1);
  const ControlProblemData d = problem_for(make_case(Domain::UnitSquare));
  const ActiveSets inactive(s.spaces.control_dofs.size(), ActiveState::Inactive);
  const KKTSystem sys = assemble_kkt(d, inactive, s.spaces, s.ops);
  const double maxk = Eigen::MatrixXd(sys.K).cwiseAbs().maxCoeff();
  CHECK(symmetry_defect(sys.K) <= 1e-13 * maxk);
  CHECK(sys.K.rows() == sys.rhs.size());
  // layout: w block, inactive y block, pressures + multiplier, mirrored
  // adjoint blocks
  const int nvf = static_cast<int>(s.spaces.v_free_idx.size());
  CHECK(sys.o_y == nvf);
  CHECK(sys.o_lp >= 0);  // zero-mean row present on the pure-control square
  CHECK(sys.o_nu >= 0);
}

TEST_CASE("zero data solves to zero in one iteration") {
  const Setup s = make(Domain::UnitSquare, 2);
  ControlProblemData d;
  d.bounds = make_case(Domain::UnitSquare).bounds;
  d.f = [](double, double) { return Vec2{0.0, 0.0}; };
  d.u_d = [](double, double) { return Vec2{0.0, 0.0}; };
  const OptimalSolution sol = pdas_solve(d, s.spaces, s.ops);
  CHECK(sol.converged);
  CHECK(sol.iterations == 1);
  CHECK(sol.cost == 0.0);
  CHECK(sol.u.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(sol.phi.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(sol.mu.lpNorm<Eigen::Infinity>() == 0.0);
  for (const ActiveState a : sol.active) CHECK(a == ActiveState::Inactive);
}

TEST_CASE("mixed square without zero-mean row solves zero data") {
  const Setup s = make(Domain::MixedSquare, 2);
  CHECK_FALSE(s.spaces.pressure_zero_mean);
  ControlProblemData d;
  d.bounds = ControlBounds{{-1.0, -1.0}, {1.0, 1.0}};
  d.f = [](double, double) { return Vec2{0.0, 0.0}; };
  d.u_d = [](double, double) { return Vec2{0.0, 0.0}; };
  const OptimalSolution sol = pdas_solve(d, s.spaces, s.ops);
  CHECK(sol.converged);
  CHECK(sol.iterations == 1);
  CHECK(sol.flux_multiplier == 0.0);
  CHECK(sol.u.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("active set pinned at an infinite bound is rejected") {
  const Setup s = make(Domain::UnitSquare, 1);
  ControlProblemData d;  // default bounds are infinite
  d.f = [](double, double) { return Vec2{0.0, 0.0}; };
  d.u_d = [](double, double) { return Vec2{0.0, 0.0}; };
  ActiveSets active(s.spaces.control_dofs.size(), ActiveState::Inactive);
  active[0] = ActiveState::LowerActive;
  CHECK_THROWS_AS(assemble_kkt(d, active, s.spaces, s.ops), std::invalid_argument);
}

TEST_CASE("square n=1 regression: iterations, sets, errors, cost") {
  const Setup s = make(Domain::UnitSquare, 1);
  const ExactCase c = make_case(Domain::UnitSquare);
  const ControlProblemData d = problem_for(c);
  const OptimalSolution sol = pdas_solve(d, s.spaces, s.ops);
  REQUIRE(sol.converged);
  CHECK(sol.iterations == 4);
  int nl = 0, nu = 0;
  for (const ActiveState a : sol.active) {
    nl += a == ActiveState::LowerActive;
    nu += a == ActiveState::UpperActive;
  }
  CHECK(nl == 5);
  CHECK(nu == 4);
  CHECK(sol.cost == doctest::Approx(148.4702115763).epsilon(1e-10));
  CHECK(sol.flux_multiplier == doctest::Approx(-0.1544543666134).epsilon(1e-9));
  CHECK(sol.stationarity <= 1e-9);
  CHECK(sol.linear_residual <= 1e-10);

  const ErrorRow row = compute_errors(sol, c, s.spaces, 6);
  CHECK(row.err_u == doctest::Approx(7.850571757633).epsilon(1e-6));
  CHECK(row.err_p == doctest::Approx(3.380210267214).epsilon(1e-6));
  CHECK(row.err_phi == doctest::Approx(2.216664045322).epsilon(1e-6));
  CHECK(row.err_r == doctest::Approx(0.5063654837248).epsilon(1e-6));
  CHECK(row.err_y == doctest::Approx(7.486114019024).epsilon(1e-6));
  CHECK(row.h == doctest::Approx(std::sqrt(0.5)).epsilon(1e-13));

  // frozen active pattern keyed by vertex coordinates and component
  struct Want {
    double x, y;
    int comp;
    ActiveState state;
    double value;
  };
  const Want pattern[] = {
      {0.0, 1.0, 0, ActiveState::LowerActive, -4.0},
      {1.0, 1.0, 0, ActiveState::Inactive, -1.617817466454},
      {1.0, 0.5, 0, ActiveState::LowerActive, -4.0},
      {0.5, 1.0, 0, ActiveState::UpperActive, 0.0},
      {0.0, 0.5, 0, ActiveState::UpperActive, 0.0},
      {0.0, 1.0, 1, ActiveState::LowerActive, 0.0},
      {1.0, 1.0, 1, ActiveState::LowerActive, 0.0},
      {1.0, 0.5, 1, ActiveState::LowerActive, 0.0},
      {0.5, 1.0, 1, ActiveState::UpperActive, 2.5},
      {0.0, 0.5, 1, ActiveState::UpperActive, 2.5},
  };
  for (const Want& w : pattern) {
    const int k = control_index(s, w.x, w.y, w.comp);
    REQUIRE(k >= 0);
    CHECK(sol.active[k] == w.state);
    CHECK(sol.y[s.spaces.control_dofs[k]] == doctest::Approx(w.value).epsilon(1e-9));
  }
  // multiplier signs and frozen sample values
  const int klow = control_index(s, 0.0, 1.0, 0);
  const int kup = control_index(s, 0.5, 1.0, 0);
  CHECK(sol.mu[klow] == doctest::Approx(0.09882169256673).epsilon(1e-8));
  CHECK(sol.mu[kup] == doctest::Approx(-1.401356057391).epsilon(1e-8));
}

TEST_CASE("square n=2 and lshape n=2 regressions") {
  {
    const Setup s = make(Domain::UnitSquare, 2);
    const ExactCase c = make_case(Domain::UnitSquare);
    const OptimalSolution sol = pdas_solve(problem_for(c), s.spaces, s.ops);
    REQUIRE(sol.converged);
    CHECK(sol.iterations == 4);
    int nl = 0, nu = 0;
    for (const ActiveState a : sol.active) {
      nl += a == ActiveState::LowerActive;
      nu += a == ActiveState::UpperActive;
    }
    CHECK(nl == 5);
    CHECK(nu == 10);
    CHECK(sol.cost == doctest::Approx(147.6721007315).epsilon(1e-10));
    CHECK(sol.flux_multiplier == doctest::Approx(-0.3877554137928).epsilon(1e-9));
    const ErrorRow row = compute_errors(sol, c, s.spaces, 6);
    CHECK(row.err_u == doctest::Approx(7.993148872846).epsilon(1e-6));
    CHECK(row.err_p == doctest::Approx(7.032922840018).epsilon(1e-6));
    CHECK(row.err_phi == doctest::Approx(1.264111236286).epsilon(1e-6));
    CHECK(row.err_r == doctest::Approx(0.3054425186616).epsilon(1e-6));
    CHECK(row.err_y == doctest::Approx(6.767394103802).epsilon(1e-6));
  }
  {
    const Setup s = make(Domain::LShape, 2);
    const ExactCase c = make_case(Domain::LShape);
    const OptimalSolution sol = pdas_solve(problem_for(c), s.spaces, s.ops);
    REQUIRE(sol.converged);
    CHECK(sol.iterations == 5);
    int nl = 0, nu = 0;
    for (const ActiveState a : sol.active) {
      nl += a == ActiveState::LowerActive;
      nu += a == ActiveState::UpperActive;
    }
    CHECK(nl == 20);
    CHECK(nu == 22);
    CHECK(sol.cost == doctest::Approx(1754.278063304).epsilon(1e-10));
    CHECK(sol.flux_multiplier == doctest::Approx(-0.2644806552845).epsilon(1e-9));
    const ErrorRow row = compute_errors(sol, c, s.spaces, 6);
    CHECK(row.err_u == doctest::Approx(6.730278711446).epsilon(1e-6));
    CHECK(row.err_p == doctest::Approx(7.870554495900).epsilon(1e-6));
    CHECK(row.err_phi == doctest::Approx(2.175553288634).epsilon(1e-6));
    CHECK(row.err_r == doctest::Approx(0.2388517086020).epsilon(1e-6));
    CHECK(row.err_y == doctest::Approx(5.260515928881).epsilon(1e-6));
  }
}

TEST_CASE("brute force agrees with the active-set solve on the coarsest square") {
  const Setup s = make(Domain::UnitSquare, 1);
  REQUIRE(s.spaces.control_dofs.size() == 10);
  const ControlProblemData d = problem_for(make_case(Domain::UnitSquare));
  const OptimalSolution pdas = pdas_solve(d, s.spaces, s.ops);
  const OptimalSolution brute = brute_force_solve(d, s.spaces, s.ops);
  CHECK(brute.converged);
  CHECK((pdas.u - brute.u).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK((pdas.y - brute.y).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK((pdas.phi - brute.phi).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK((pdas.p - brute.p).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK((pdas.mu - brute.mu).lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK(std::abs(pdas.cost - brute.cost) <= 1e-8);
  REQUIRE(pdas.active.size() == brute.active.size());
  for (size_t k = 0; k < pdas.active.size(); ++k) CHECK(pdas.active[k] == brute.active[k]);
}

TEST_CASE("brute force guard rejects more than ten control DOFs") {
  const Setup s = make(Domain::UnitSquare, 2);
  REQUIRE(s.spaces.control_dofs.size() > 10);
  const ControlProblemData d = problem_for(make_case(Domain::UnitSquare));
  CHECK_THROWS_AS(brute_force_solve(d, s.spaces, s.ops), std::runtime_error);
}

TEST_CASE("optimality certificate holds on the square n=2 solve") {
  const Setup s = make(Domain::UnitSquare, 2);
  const ControlProblemData d = problem_for(make_case(Domain::UnitSquare));
  const OptimalSolution sol = pdas_solve(d, s.spaces, s.ops);
  REQUIRE(sol.converged);
  const OptimalityReport rep = check_optimality(sol, d, s.spaces, s.ops);
  CHECK(rep.stationarity <= 1e-9);
  CHECK(rep.max_bound_violation <= 1e-10);
  CHECK(rep.max_complementarity <= 1e-10);
  CHECK(rep.sign_violation <= 1e-10);
  CHECK(rep.divergence <= 1e-10);
  CHECK(rep.min_vi >= -1e-10);
  CHECK(stationarity_residual(sol, d, s.spaces, s.ops) == doctest::Approx(rep.stationarity));
}

TEST_CASE("cost is minimal among feasible control perturbations") {
  const Setup s = make(Domain::UnitSquare, 1);
  const ExactCase c = make_case(Domain::UnitSquare);
  const ControlProblemData d = problem_for(c);
  const OptimalSolution sol = pdas_solve(d, s.spaces, s.ops);
  REQUIRE(sol.converged);
  const SaddleSolver solver(s.spaces, s.ops);
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd y_pert = sol.y;
    for (size_t k = 0; k < s.spaces.control_dofs.size(); ++k) {
      const int dof = s.spaces.control_dofs[k];
      const double lo = d.bounds.ya[dof % 2], hi = d.bounds.yb[dof % 2];
      y_pert[dof] = lo + (hi - lo) * uni(rng);
    }
    const StokesSolution state = solve_state(y_pert, d.f, s.spaces, s.ops, solver);
    const double cost = evaluate_cost(d, s.spaces, s.ops, state.velocity, y_pert);
    CHECK(cost >= sol.cost - 1e-9);
  }
}

TEST_CASE("vi residual rejects infeasible comparison controls") {
  const Setup s = make(Domain::UnitSquare, 1);
  const ControlProblemData d = problem_for(make_case(Domain::UnitSquare));
  const OptimalSolution sol = pdas_solve(d, s.spaces, s.ops);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(s.spaces.control_dofs.size());
  CHECK(vi_residual(sol, d, s.spaces, s.ops, x) >= -1e-10);
  x[0] = d.bounds.ya[s.spaces.control_dofs[0] % 2] - 0.5;
  CHECK_THROWS_AS(vi_residual(sol, d, s.spaces, s.ops, x), std::invalid_argument);
}

TEST_CASE("a corrupted multiplier is caught by the recomputed stationarity") {
  const Setup s = make(Domain::UnitSquare, 1);
  const ControlProblemData d = problem_for(make_case(Domain::UnitSquare));
  OptimalSolution sol = pdas_solve(d, s.spaces, s.ops);
  REQUIRE(sol.converged);
  REQUIRE(stationarity_residual(sol, d, s.spaces, s.ops) <= 1e-9);
  sol.mu = -sol.mu;  // sign flip must be visible to the certificate
  CHECK(stationarity_residual(sol, d, s.spaces, s.ops) > 1e-3);
}

TEST_CASE("solution scales linearly with the data") {
  const Setup s = make(Domain::UnitSquare, 2);
  const ExactCase c = make_case(Domain::UnitSquare);
  const ControlProblemData d = problem_for(c);
  const OptimalSolution base = pdas_solve(d, s.spaces, s.ops);
  const double sf = 3.0;
  ControlProblemData scaled = d;
  scaled.f = [&c, sf](double x, double y) {
    const Vec2 v = c.f(x, y);
    return Vec2{sf * v.x, sf * v.y};
  };
  scaled.u_d = [&c, sf](double x, double y) {
    const Vec2 v = c.u_d(x, y);
    return Vec2{sf * v.x, sf * v.y};
  };
  scaled.grad_yd1 = [&c, sf](double x, double y) {
    const Vec2 v = c.grad_u1(x, y);
    return Vec2{sf * v.x, sf * v.y};
  };
  scaled.grad_yd2 = [&c, sf](double x, double y) {
    const Vec2 v = c.grad_u2(x, y);
    return Vec2{sf * v.x, sf * v.y};
  };
  scaled.bounds.ya = {sf * d.bounds.ya[0], sf * d.bounds.ya[1]};
  scaled.bounds.yb = {sf * d.bounds.yb[0], sf * d.bounds.yb[1]};
  const OptimalSolution big = pdas_solve(scaled, s.spaces, s.ops);
  REQUIRE(big.converged);
  const double scale = sf * base.u.lpNorm<Eigen::Infinity>();
  CHECK((big.u - sf * base.u).lpNorm<Eigen::Infinity>() <= 1e-9 * scale);
  CHECK((big.y - sf * base.y).lpNorm<Eigen::Infinity>() <= 1e-9 * scale);
  CHECK((big.phi - sf * base.phi).lpNorm<Eigen::Infinity>() <= 1e-9 * scale);
  REQUIRE(big.active.size() == base.active.size());
  for (size_t k = 0; k < big.active.size(); ++k) CHECK(big.active[k] == base.active[k]);
}

TEST_CASE("iteration log tracks the set evolution") {
  const Setup s = make(Domain::UnitSquare, 1);
  const ControlProblemData d = problem_for(make_case(Domain::UnitSquare));
  const OptimalSolution sol = pdas_solve(d, s.spaces, s.ops);
  REQUIRE(sol.log.size() == static_cast<size_t>(sol.iterations));
  CHECK(sol.log.front().iter == 1);
  CHECK(sol.log.back().n_lower == 5);
  CHECK(sol.log.back().n_upper == 4);
  CHECK(sol.log.back().cost == doctest::Approx(sol.cost));
}

}  // TEST_SUITE
