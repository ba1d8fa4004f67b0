#pragma once
// Command front end: convergence studies, single solves with field dumps, and
// the self-verification suite. Kept in the library so the test binaries can
// drive the same code paths.

#include <array>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "stokesctrl/io.hpp"
#include "stokesctrl/optimizer.hpp"

namespace stokesctrl {

// study level in the table numbering -> coarse subdivision count:
// unit square level l has fine spacing 2^-l (coarse n = 2^(l-1)),
// L-shape level l has fine spacing 2^-(l+1) on the half-unit legs (n = 2^l)
int coarse_n_for_level(Domain domain, int level);

const char* domain_name(Domain domain);

struct StudyConfig {
  Domain domain = Domain::UnitSquare;
  std::vector<int> levels;  // strictly increasing
  double rho = 0.0;         // <= 0 keeps the example default
  bool override_ya = false, override_yb = false;
  std::array<double, 2> ya{}, yb{};
  PDASConfig pdas;
  int quad_degree = 6;
  std::string out_dir = ".";
  bool write_csv = true, write_table = true, write_vtk = false;
  bool parallel = false;   // levels share nothing; opt-in std::async fan-out
  bool zero_data = false;  // replace f, u_d, y_d by zero (plumbing checks)
};

// example data with the config's rho / bounds overrides applied
ExactCase configured_case(const StudyConfig& cfg);
// control problem whose target control y_d is the example's exact state
ControlProblemData problem_from_case(const ExactCase& c);

// one solved level, self-contained (owns its mesh; spaces point into it)
struct LevelResult {
  int level = 0, coarse_n = 0;
  std::unique_ptr<TwoLevelMesh> mesh;
  BoundaryInfo binfo;
  FunctionSpaces spaces;
  StokesOperators ops;
  MeshSizes sizes;
  OptimalSolution sol;
  ErrorRow row;  // orders filled by run_study
};

LevelResult run_level(const StudyConfig& cfg, int level);

struct StudyResult {
  std::vector<LevelResult> levels;
  std::vector<ErrorRow> rows;
};

StudyResult run_study(const StudyConfig& cfg);

int cmd_study(const StudyConfig& cfg, std::ostream& out);
int cmd_solve(const StudyConfig& cfg, int level, std::ostream& out);

struct VerifyConfig {
  int quad_degree = 6;
  // fault hook: flips the sign of the reported multiplier before the checks,
  // which must then fail (exercises the verifier itself)
  bool inject_mu_sign_flip = false;
};
int cmd_verify(const VerifyConfig& cfg, std::ostream& out);

}  // namespace stokesctrl
