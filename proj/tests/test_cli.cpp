#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "stokesctrl/cli.hpp"

using namespace stokesctrl;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(CLI_BINARY_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string text;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) text.append(buf, got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, text};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("stokesctrl_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

double parse_scalar(const std::string& text, const std::string& key) {
  const size_t at = text.find(key + "=");
  REQUIRE(at != std::string::npos);
  return std::strtod(text.c_str() + at + key.size() + 1, nullptr);
}

// columns of a point/cell csv after the schema and header lines
std::vector<std::vector<double>> parse_csv(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "#schema=1");
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    std::vector<double> vals;
    double v;
    while (row >> v) vals.push_back(v);
    rows.push_back(std::move(vals));
  }
  return rows;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("coarse subdivision count per level") {
  CHECK(coarse_n_for_level(Domain::UnitSquare, 1) == 1);
  CHECK(coarse_n_for_level(Domain::UnitSquare, 2) == 2);
  CHECK(coarse_n_for_level(Domain::UnitSquare, 5) == 16);
  CHECK(coarse_n_for_level(Domain::MixedSquare, 3) == 4);
  CHECK(coarse_n_for_level(Domain::LShape, 1) == 2);
  CHECK(coarse_n_for_level(Domain::LShape, 2) == 4);
  CHECK(coarse_n_for_level(Domain::LShape, 4) == 16);
  CHECK_THROWS(coarse_n_for_level(Domain::UnitSquare, 0));
  CHECK_THROWS(coarse_n_for_level(Domain::UnitSquare, 11));
}

TEST_CASE("run_study: single level keeps zero orders, multi level fills them") {
  StudyConfig cfg;
  cfg.domain = Domain::UnitSquare;
  cfg.levels = {1};
  cfg.write_csv = cfg.write_table = false;
  const StudyResult single = run_study(cfg);
  REQUIRE(single.rows.size() == 1);
  CHECK(single.rows[0].ord_u == 0.0);
  CHECK(single.rows[0].ord_y == 0.0);
  CHECK(single.rows[0].err_u > 0.0);

  cfg.levels = {1, 2};
  const StudyResult both = run_study(cfg);
  REQUIRE(both.rows.size() == 2);
  CHECK(both.rows[0].ord_u == 0.0);
  CHECK(both.rows[1].ord_u != 0.0);
  CHECK(both.rows[1].h == doctest::Approx(0.5 * both.rows[0].h));

  cfg.levels = {2, 1};
  CHECK_THROWS(run_study(cfg));
}

TEST_CASE("solve command: reported cost matches the dumped fields") {
  const fs::path dir = fresh_dir("solve");
  const RunResult r =
      run_cli("solve --example square --level 1 --out " + dir.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("files written:") != std::string::npos);
  CHECK(r.output.find("converged=yes") != std::string::npos);
  const double cost = parse_scalar(r.output, "cost");
  CHECK(cost == doctest::Approx(148.4702115763).epsilon(1e-10));

  // full-precision dumps reproduce the printed cost through recomputation
  const auto pts = parse_csv(dir / "square_level1_points.csv");
  TwoLevelMesh mesh = refine_red(build_coarse(Domain::UnitSquare, 1));
  const BoundaryInfo binfo = classify_boundary(mesh);
  const FunctionSpaces spaces = build_spaces(mesh, binfo);
  const StokesOperators ops = assemble_operators(spaces);
  REQUIRE(pts.size() == mesh.verts.size());
  Eigen::VectorXd u(spaces.n_vdofs), y(spaces.n_vdofs);
  for (const auto& row : pts) {
    REQUIRE(row.size() == 9);  // vertex,x,y + u,phi,y pairs
    const int v = static_cast<int>(row[0]);
    u[2 * v] = row[3];
    u[2 * v + 1] = row[4];
    y[2 * v] = row[7];
    y[2 * v + 1] = row[8];
  }
  const ExactCase c = make_case(Domain::UnitSquare);
  ControlProblemData d;
  d.rho = c.rho;
  d.bounds = c.bounds;
  d.f = c.f;
  d.u_d = c.u_d;
  d.grad_yd1 = c.grad_u1;
  d.grad_yd2 = c.grad_u2;
  const double recomputed = evaluate_cost(d, spaces, ops, u, y);
  CHECK(std::abs(recomputed - cost) <= 1e-12 * std::max(1.0, std::abs(cost)));
  fs::remove_all(dir);
}

TEST_CASE("study command: deterministic csv tables with schema headers") {
  const fs::path da = fresh_dir("study_a");
  const fs::path db = fresh_dir("study_b");
  const std::string args = "study --example square --levels 1..2 --out ";
  const RunResult ra = run_cli(args + da.string());
  const RunResult rb = run_cli(args + db.string());
  CHECK(ra.exit_code == 0);
  CHECK(rb.exit_code == 0);
  for (const char* name : {"square_state.csv", "square_adjoint.csv", "square_control.csv"}) {
    const std::string a = slurp(da / name);
    CHECK(a.rfind("#schema=1", 0) == 0);
    CHECK(a == slurp(db / name));  // bitwise identical across runs
  }
  // state table: h column halves, error columns positive
  const auto rows = parse_csv(da / "square_state.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][0] == doctest::Approx(0.5 * rows[0][0]));
  CHECK(rows[0][3] > 0.0);
  fs::remove_all(da);
  fs::remove_all(db);
}

TEST_CASE("parallel study matches the serial one") {
  StudyConfig serial;
  serial.domain = Domain::UnitSquare;
  serial.levels = {1, 2};
  serial.write_csv = serial.write_table = false;
  StudyConfig par = serial;
  par.parallel = true;
  const StudyResult a = run_study(serial);
  const StudyResult b = run_study(par);
  REQUIRE(a.rows.size() == b.rows.size());
  for (size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(a.rows[k].err_u == b.rows[k].err_u);
    CHECK(a.rows[k].err_y == b.rows[k].err_y);
    CHECK(a.rows[k].ord_y == b.rows[k].ord_y);
  }
}

TEST_CASE("zero-data run dumps all-zero fields") {
  const fs::path dir = fresh_dir("zero");
  const RunResult r = run_cli(
      "solve --example square --level 1 --zero-data --out " + dir.string());
  CHECK(r.exit_code == 0);
  CHECK(parse_scalar(r.output, "cost") == 0.0);
  CHECK(r.output.find("iterations=1") != std::string::npos);
  for (const auto& row : parse_csv(dir / "square_level1_points.csv"))
    for (size_t k = 3; k < row.size(); ++k) CHECK(row[k] == 0.0);
  for (const auto& row : parse_csv(dir / "square_level1_cells.csv"))
    for (size_t k = 1; k < row.size(); ++k) CHECK(row[k] == 0.0);
  fs::remove_all(dir);
}

TEST_CASE("vtk output is a legacy unstructured grid with the solution fields") {
  const fs::path dir = fresh_dir("vtk");
  const RunResult r = run_cli(
      "solve --example square --level 1 --format csv,table,vtk --out " + dir.string());
  CHECK(r.exit_code == 0);
  const std::string text = slurp(dir / "square_level1.vtk");
  CHECK(text.rfind("# vtk DataFile", 0) == 0);
  CHECK(text.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(text.find("VECTORS u double") != std::string::npos);
  CHECK(text.find("VECTORS phi double") != std::string::npos);
  CHECK(text.find("VECTORS y double") != std::string::npos);
  CHECK(text.find("SCALARS p double") != std::string::npos);
  CHECK(text.find("SCALARS r double") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("invalid invocations fail with a diagnostic") {
  CHECK(run_cli("study --example square --levels 3,2").exit_code != 0);
  CHECK(run_cli("study --example nosuch --levels 1").exit_code != 0);
  CHECK(run_cli("solve --example square --level 99").exit_code != 0);
  CHECK(run_cli("study --example square --levels 1 --quad-degree 3").exit_code != 0);
  const RunResult r = run_cli("study --example square --levels 3,2");
  CHECK(r.output.find("error") != std::string::npos);
}

TEST_CASE("verify command passes, and the fault hook makes it fail") {
  const RunResult ok = run_cli("verify");
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("verification PASSED") != std::string::npos);
  CHECK(ok.output.find("[FAIL]") == std::string::npos);
  const RunResult bad = run_cli("verify --inject-mu-sign-flip");
  CHECK(bad.exit_code != 0);
  CHECK(bad.output.find("verification FAILED") != std::string::npos);
  CHECK(bad.output.find("[FAIL]") != std::string::npos);
}

}  // TEST_SUITE
