#include "stokesctrl/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <future>
#include <limits>
#include <stdexcept>

namespace stokesctrl {

int coarse_n_for_level(Domain domain, int level) {
  if (level < 1 || level > 10)
    throw std::invalid_argument("refinement level must be in [1, 10]");
  // L-shape legs have half-unit length, so the same fine spacing needs twice
  // the subdivision count
  return domain == Domain::LShape ? (1 << level) : (1 << (level - 1));
}

const char* domain_name(Domain domain) {
  switch (domain) {
    case Domain::UnitSquare: return "square";
    case Domain::LShape: return "lshape";
    case Domain::MixedSquare: return "mixed";
  }
  return "unknown";
}

ExactCase configured_case(const StudyConfig& cfg) {
  ExactCase c = make_case(cfg.domain);
  if (cfg.rho > 0) c.rho = cfg.rho;
  if (cfg.override_ya) c.bounds.ya = cfg.ya;
  if (cfg.override_yb) c.bounds.yb = cfg.yb;
  return c;
}

ControlProblemData problem_from_case(const ExactCase& c) {
  ControlProblemData d;
  d.rho = c.rho;
  d.bounds = c.bounds;
  d.f = c.f;
  d.u_d = c.u_d;
  // the examples choose y_d equal to the exact state
  d.grad_yd1 = c.grad_u1;
  d.grad_yd2 = c.grad_u2;
  return d;
}

namespace {

ControlProblemData zero_problem(const ExactCase& c) {
  ControlProblemData d;
  d.rho = c.rho;
  d.bounds = c.bounds;
  d.f = [](double, double) { return Vec2{}; };
  d.u_d = [](double, double) { return Vec2{}; };
  return d;
}

std::string path_join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::string strf(const char* format, ...) {
  char buf[320];
  va_list args;
  va_start(args, format);
  vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

void print_manifest(std::ostream& out, const std::vector<std::string>& files) {
  if (files.empty()) {
    out << "files written: (none)\n";
    return;
  }
  out << "files written:\n";
  for (const auto& f : files) out << "  " << f << "\n";
}

void dump_vtk_level(const LevelResult& L, const std::string& path) {
  write_vtk_solution(L.spaces,
                     {{"u", &L.sol.u}, {"phi", &L.sol.phi}, {"y", &L.sol.y}},
                     {{"p", &L.sol.p}, {"r", &L.sol.r}}, path);
}

}  // namespace

LevelResult run_level(const StudyConfig& cfg, int level) {
  LevelResult L;
  L.level = level;
  L.coarse_n = coarse_n_for_level(cfg.domain, level);
  const ExactCase c = configured_case(cfg);
  L.mesh = std::make_unique<TwoLevelMesh>(refine_red(build_coarse(cfg.domain, L.coarse_n)));
  L.binfo = classify_boundary(*L.mesh);
  L.spaces = build_spaces(*L.mesh, L.binfo);
  L.ops = assemble_operators(L.spaces, cfg.quad_degree);
  const ControlProblemData prob =
      cfg.zero_data ? zero_problem(c) : problem_from_case(c);
  L.sol = pdas_solve(prob, L.spaces, L.ops, cfg.pdas);
  if (!L.sol.converged)
    throw std::runtime_error("PDAS did not converge on level " + std::to_string(level));
  L.sizes = mesh_sizes(*L.mesh);
  L.row = compute_errors(L.sol, c, L.spaces, cfg.quad_degree);
  return L;
}

StudyResult run_study(const StudyConfig& cfg) {
  if (cfg.levels.empty()) throw std::invalid_argument("no study levels given");
  for (size_t i = 1; i < cfg.levels.size(); ++i)
    if (cfg.levels[i] <= cfg.levels[i - 1])
      throw std::invalid_argument("study levels must be strictly increasing");
  triangle_quadrature(cfg.quad_degree);  // validates the degree early

  StudyResult res;
  if (cfg.parallel) {
    std::vector<std::future<LevelResult>> futs;
    futs.reserve(cfg.levels.size());
    for (int level : cfg.levels)
      futs.push_back(std::async(std::launch::async,
                                [&cfg, level] { return run_level(cfg, level); }));
    for (auto& f : futs) res.levels.push_back(f.get());
  } else {
    for (int level : cfg.levels) res.levels.push_back(run_level(cfg, level));
  }
  for (const LevelResult& L : res.levels) res.rows.push_back(L.row);
  fill_eoc(res.rows);
  for (size_t i = 0; i < res.levels.size(); ++i) res.levels[i].row = res.rows[i];
  return res;
}

int cmd_study(const StudyConfig& cfg, std::ostream& out) {
  try {
    const StudyResult res = run_study(cfg);
    const std::string stem = domain_name(cfg.domain);
    for (const LevelResult& L : res.levels)
      out << strf("level %d (n=%d): h=%.6g vdofs=%d iters=%d cost=%.12g stationarity=%.3e\n",
                  L.level, L.coarse_n, L.sizes.h, L.spaces.n_vdofs, L.sol.iterations,
                  L.sol.cost, L.sol.stationarity);
    if (cfg.write_table)
      print_error_tables(out, strf("example %s, levels %d..%d", stem.c_str(),
                                   cfg.levels.front(), cfg.levels.back()),
                         res.rows);
    std::vector<std::string> files;
    if (cfg.write_csv || cfg.write_vtk) std::filesystem::create_directories(cfg.out_dir);
    if (cfg.write_csv) {
      const std::string ps = path_join(cfg.out_dir, stem + "_state.csv");
      const std::string pa = path_join(cfg.out_dir, stem + "_adjoint.csv");
      const std::string pc = path_join(cfg.out_dir, stem + "_control.csv");
      write_state_table(res.rows, ps);
      write_adjoint_table(res.rows, pa);
      write_control_table(res.rows, pc);
      files.insert(files.end(), {ps, pa, pc});
    }
    if (cfg.write_vtk)
      for (const LevelResult& L : res.levels) {
        const std::string pv =
            path_join(cfg.out_dir, strf("%s_level%d.vtk", stem.c_str(), L.level));
        dump_vtk_level(L, pv);
        files.push_back(pv);
      }
    print_manifest(out, files);
    return 0;
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_solve(const StudyConfig& cfg, int level, std::ostream& out) {
  try {
    const LevelResult L = run_level(cfg, level);
    std::filesystem::create_directories(cfg.out_dir);
    const std::string stem =
        strf("%s_level%d", domain_name(cfg.domain), level);
    int nl = 0, nu = 0;
    for (ActiveState s : L.sol.active) {
      nl += s == ActiveState::LowerActive;
      nu += s == ActiveState::UpperActive;
    }
    out << strf("%s level %d: coarse n=%d h=%.6g H=%.6g spacing=%.6g\n",
                domain_name(cfg.domain), level, L.coarse_n, L.sizes.h, L.sizes.H,
                L.sizes.spacing);
    out << strf("control DOFs=%d, active lower=%d upper=%d\n",
                static_cast<int>(L.spaces.control_dofs.size()), nl, nu);
    out << strf("iterations=%d converged=%s\n", L.sol.iterations,
                L.sol.converged ? "yes" : "no");
    out << strf("cost=%.17g\n", L.sol.cost);
    out << strf("stationarity=%.3e linear_residual=%.3e flux_multiplier=%.17g\n",
                L.sol.stationarity, L.sol.linear_residual, L.sol.flux_multiplier);

    std::vector<std::string> files;
    const std::string pts = path_join(cfg.out_dir, stem + "_points.csv");
    write_csv_point_fields(L.spaces,
                           {{"u", &L.sol.u}, {"phi", &L.sol.phi}, {"y", &L.sol.y}}, pts);
    files.push_back(pts);
    const std::string cells = path_join(cfg.out_dir, stem + "_cells.csv");
    write_csv_cell_fields(L.spaces, {{"p", &L.sol.p}, {"r", &L.sol.r}}, cells);
    files.push_back(cells);
    if (cfg.write_vtk) {
      const std::string pv = path_join(cfg.out_dir, stem + ".vtk");
      dump_vtk_level(L, pv);
      files.push_back(pv);
    }
    print_manifest(out, files);
    return 0;
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return 1;
  }
}

namespace {

struct Checker {
  std::ostream& out;
  bool all_ok = true;
  void check(bool ok, const std::string& name, const std::string& detail = "") {
    out << (ok ? "[ok]   " : "[FAIL] ") << name;
    if (!detail.empty()) out << ": " << detail;
    out << "\n";
    all_ok = all_ok && ok;
  }
  void note(const std::string& name, const std::string& detail) {
    out << "[note] " << name << ": " << detail << "\n";
  }
};

double max_field_deviation(const OptimalSolution& a, const OptimalSolution& b) {
  double d = 0.0;
  const auto upd = [&d](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() == y.size() && x.size() > 0)
      d = std::max(d, (x - y).lpNorm<Eigen::Infinity>());
    else if (x.size() != y.size())
      d = std::numeric_limits<double>::infinity();
  };
  upd(a.w, b.w);
  upd(a.y, b.y);
  upd(a.u, b.u);
  upd(a.phi, b.phi);
  upd(a.p, b.p);
  upd(a.r, b.r);
  upd(a.mu, b.mu);
  return d;
}

ControlProblemData scaled_problem(const ControlProblemData& base, double s) {
  ControlProblemData d = base;
  const VecFn f0 = base.f, ud0 = base.u_d;
  d.f = [f0, s](double x, double y) {
    const Vec2 v = f0(x, y);
    return Vec2{s * v.x, s * v.y};
  };
  d.u_d = [ud0, s](double x, double y) {
    const Vec2 v = ud0(x, y);
    return Vec2{s * v.x, s * v.y};
  };
  if (base.grad_yd1 && base.grad_yd2) {
    const VecFn g1 = base.grad_yd1, g2 = base.grad_yd2;
    d.grad_yd1 = [g1, s](double x, double y) {
      const Vec2 v = g1(x, y);
      return Vec2{s * v.x, s * v.y};
    };
    d.grad_yd2 = [g2, s](double x, double y) {
      const Vec2 v = g2(x, y);
      return Vec2{s * v.x, s * v.y};
    };
  }
  for (int c = 0; c < 2; ++c) {
    d.bounds.ya[c] = s * base.bounds.ya[c];
    d.bounds.yb[c] = s * base.bounds.yb[c];
  }
  return d;
}

}  // namespace

int cmd_verify(const VerifyConfig& vcfg, std::ostream& out) {
  Checker ck{out};
  try {
    StudyConfig sq;
    sq.domain = Domain::UnitSquare;
    sq.quad_degree = vcfg.quad_degree;
    StudyConfig ls;
    ls.domain = Domain::LShape;
    ls.quad_degree = vcfg.quad_degree;

    std::vector<LevelResult> sqL;
    for (int level = 1; level <= 4; ++level) sqL.push_back(run_level(sq, level));
    std::vector<LevelResult> lsL;
    for (int level = 1; level <= 2; ++level) lsL.push_back(run_level(ls, level));

    const ControlProblemData sq_prob = problem_from_case(configured_case(sq));
    const ControlProblemData ls_prob = problem_from_case(configured_case(ls));

    if (vcfg.inject_mu_sign_flip) {
      sqL[0].sol.mu = -sqL[0].sol.mu;
      ck.note("fault injection", "multiplier sign flipped on square level 1");
    }

    // brute-force oracle on the coarsest square mesh
    {
      const LevelResult& L = sqL[0];
      const int m = static_cast<int>(L.spaces.control_dofs.size());
      if (m > 10) {
        ck.note("brute-force oracle",
                strf("skipped (guard: %d control DOFs > 10)", m));
      } else {
        const OptimalSolution ref = brute_force_solve(sq_prob, L.spaces, L.ops, sq.pdas);
        const double dev = max_field_deviation(L.sol, ref);
        ck.check(dev <= 1e-8, "brute-force agreement",
                 strf("max coefficient deviation %.3e over 3^%d assignments", dev, m));
        ck.check(L.sol.active == ref.active, "brute-force active sets",
                 "enumeration and PDAS select the same sets");
      }
    }

    // first-order optimality residuals
    const auto residual_suite = [&](const LevelResult& L, const ControlProblemData& prob,
                                    const char* tag) {
      const OptimalityReport rep =
          check_optimality(L.sol, prob, L.spaces, L.ops, 100, 20240u + L.level);
      ck.check(L.sol.converged, strf("%s converged", tag),
               strf("%d iterations", L.sol.iterations));
      ck.check(rep.stationarity <= 1e-9, strf("%s stationarity", tag),
               strf("%.3e", rep.stationarity));
      ck.check(rep.min_vi >= -1e-10, strf("%s variational inequality", tag),
               strf("min pairing %.3e over 100 directions", rep.min_vi));
      ck.check(rep.max_complementarity <= 1e-10, strf("%s complementarity", tag),
               strf("%.3e", rep.max_complementarity));
      ck.check(rep.sign_violation <= 1e-10, strf("%s multiplier signs", tag),
               strf("%.3e", rep.sign_violation));
      ck.check(rep.max_bound_violation <= 1e-10, strf("%s bounds", tag),
               strf("%.3e", rep.max_bound_violation));
      ck.check(rep.divergence <= 1e-10, strf("%s divergence constraint", tag),
               strf("%.3e", rep.divergence));
    };
    for (int i = 0; i < 3; ++i)
      residual_suite(sqL[i], sq_prob, strf("square level %d", i + 1).c_str());
    for (int i = 0; i < 2; ++i)
      residual_suite(lsL[i], ls_prob, strf("lshape level %d", i + 1).c_str());

    // projection inequalities on the square, levels 1..4
    {
      const ExactCase c = configured_case(sq);
      for (const LevelResult& L : sqL) {
        SaddleSolver solver(L.spaces, L.ops);
        const auto [Pw, Rp] = project_state(c, L.spaces, L.ops, solver);
        const auto [Pphi, Rr] = project_adjoint(c, L.spaces, L.ops, solver);
        const double lhs_state = h1_seminorm(L.spaces, Pw - L.sol.w);
        const double rhs_state =
            h1_error(L.spaces, L.ops.quad, L.sol.y, c.grad_u1, c.grad_u2);
        ck.check(lhs_state <= rhs_state + 1e-9,
                 strf("state projection bound, level %d", L.level),
                 strf("%.6g <= %.6g", lhs_state, rhs_state));
        const double lhs_adj = h1_seminorm(L.spaces, Pphi - L.sol.phi);
        const double rhs_adj = l2_error(L.spaces, L.ops.quad, L.sol.u, c.u);
        ck.check(lhs_adj <= rhs_adj + 1e-9,
                 strf("adjoint projection bound, level %d", L.level),
                 strf("%.6g <= %.6g", lhs_adj, rhs_adj));
      }
    }

    // inf-sup sequence and single-level negative control
    {
      double prev = 0.0;
      for (int n : {2, 4, 8}) {
        const TwoLevelMesh mesh = refine_red(build_coarse(Domain::UnitSquare, n));
        const BoundaryInfo binfo = classify_boundary(mesh);
        const FunctionSpaces spaces = build_spaces(mesh, binfo);
        const StokesOperators ops = assemble_operators(spaces, vcfg.quad_degree);
        const double beta = infsup_estimate(spaces, ops);
        const double beta_fine = infsup_estimate_fine_p0(spaces, ops);
        ck.check(beta >= 1e-3, strf("inf-sup n=%d", n), strf("beta=%.6g", beta));
        if (prev > 0.0)
          ck.check(beta / prev >= 0.8, strf("inf-sup ratio n=%d", n),
                   strf("beta ratio %.4f", beta / prev));
        ck.check(beta_fine < 1e-6 && beta_fine < beta,
                 strf("single-level P1/P0 negative control n=%d", n),
                 strf("beta=%.3e (two-level %.6g)", beta_fine, beta));
        prev = beta;
      }
    }

    // joint data scaling maps the solution linearly and keeps the active sets
    {
      const LevelResult& L = sqL[1];
      const double s = 3.0;
      const OptimalSolution sol3 =
          pdas_solve(scaled_problem(sq_prob, s), L.spaces, L.ops, sq.pdas);
      OptimalSolution scaled = L.sol;
      scaled.w *= s;
      scaled.y *= s;
      scaled.u *= s;
      scaled.phi *= s;
      scaled.p *= s;
      scaled.r *= s;
      scaled.mu *= s;
      const double dev = max_field_deviation(scaled, sol3);
      const double mag = std::max(1.0, sol3.u.lpNorm<Eigen::Infinity>());
      ck.check(dev / mag <= 1e-9, "scaling invariance (s=3)",
               strf("relative deviation %.3e", dev / mag));
      ck.check(sol3.active == L.sol.active, "scaling keeps active sets");
    }

    out << (ck.all_ok ? "verification PASSED\n" : "verification FAILED\n");
    return ck.all_ok ? 0 : 1;
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace stokesctrl
