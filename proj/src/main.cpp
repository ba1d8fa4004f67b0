#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stokesctrl/cli.hpp"

namespace {

// "2..6" (inclusive range) or "2,3,4"
std::vector<int> parse_levels(const std::string& s) {
  std::vector<int> out;
  const auto dots = s.find("..");
  if (dots != std::string::npos) {
    const int a = std::stoi(s.substr(0, dots));
    const int b = std::stoi(s.substr(dots + 2));
    for (int l = a; l <= b; ++l) out.push_back(l);
  } else {
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  }
  if (out.empty()) throw std::invalid_argument("empty level list");
  return out;
}

std::set<std::string> parse_formats(const std::string& s) {
  std::set<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok != "csv" && tok != "table" && tok != "vtk")
      throw std::invalid_argument("unknown format '" + tok + "' (csv, table, vtk)");
    out.insert(tok);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-level Stokes Dirichlet boundary-control solver"};
  app.require_subcommand(1);

  stokesctrl::StudyConfig cfg;
  stokesctrl::VerifyConfig vcfg;
  std::string example = "square", levels_arg, format_arg = "csv,table";
  std::vector<double> ya_arg, yb_arg;
  int level = 2;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--example", example, "square or lshape")
        ->check(CLI::IsMember({"square", "lshape"}));
    sub->add_option("--rho", cfg.rho, "regularization weight override")
        ->check(CLI::PositiveNumber);
    sub->add_option("--ya", ya_arg, "lower control bounds (two components)")
        ->expected(2);
    sub->add_option("--yb", yb_arg, "upper control bounds (two components)")
        ->expected(2);
    sub->add_option("--pdas-c", cfg.pdas.c, "active-set update scaling")
        ->check(CLI::PositiveNumber);
    sub->add_option("--pdas-max-iter", cfg.pdas.max_iter, "iteration cap")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol", cfg.pdas.tol, "linear-solve residual tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--quad-degree", cfg.quad_degree, "quadrature degree (1,2,4,6,8)");
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--format", format_arg, "comma list of csv,table,vtk");
    sub->add_flag("--zero-data", cfg.zero_data, "replace f, u_d, y_d by zero");
  };

  CLI::App* study = app.add_subcommand("study", "convergence study over levels");
  add_common(study);
  study->add_option("--levels", levels_arg, "range a..b or comma list")->required();
  study->add_flag("--parallel", cfg.parallel, "run levels concurrently");

  CLI::App* solve = app.add_subcommand("solve", "single solve with field dumps");
  add_common(solve);
  solve->add_option("--level", level, "refinement level")->required();

  CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
  verify->add_option("--quad-degree", vcfg.quad_degree, "quadrature degree");
  verify->add_flag("--inject-mu-sign-flip", vcfg.inject_mu_sign_flip,
                   "fault hook: corrupt the multiplier sign; the suite must fail");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.domain = example == "lshape" ? stokesctrl::Domain::LShape
                                     : stokesctrl::Domain::UnitSquare;
    if (!ya_arg.empty()) {
      cfg.override_ya = true;
      cfg.ya = {ya_arg[0], ya_arg[1]};
    }
    if (!yb_arg.empty()) {
      cfg.override_yb = true;
      cfg.yb = {yb_arg[0], yb_arg[1]};
    }
    const std::set<std::string> formats = parse_formats(format_arg);
    cfg.write_csv = formats.count("csv") > 0;
    cfg.write_table = formats.count("table") > 0;
    cfg.write_vtk = formats.count("vtk") > 0;

    if (study->parsed()) {
      cfg.levels = parse_levels(levels_arg);
      return stokesctrl::cmd_study(cfg, std::cout);
    }
    if (solve->parsed()) return stokesctrl::cmd_solve(cfg, level, std::cout);
    return stokesctrl::cmd_verify(vcfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
