#include "realbf_cli.hpp"

#include "realbf/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace realbf;
using namespace realbf::cli;

namespace {

void add_array_options(CLI::App* cmd, ArraySpec& a) {
  cmd->add_option("--array", a.kind, "Array geometry")
      ->check(CLI::IsMember({"linear", "spherical", "open"}))
      ->capture_default_str();
  cmd->add_option("--m", a.m, "Sensors of a linear array")->check(CLI::Range(1, 100000));
  cmd->add_option("--d", a.d, "Linear spacing in metres")->check(CLI::PositiveNumber);
  cmd->add_option("--f", a.f, "Frequency in Hz")->check(CLI::PositiveNumber);
  cmd->add_option("--c", a.c, "Speed of sound in m/s")->check(CLI::PositiveNumber);
  cmd->add_option("--n", a.n, "Spherical array order")->check(CLI::Range(0, 200));
  cmd->add_option("--kr", a.kr, "Spherical array kr")->check(CLI::PositiveNumber);
  cmd->add_option("--r", a.r, "Sphere radius in metres")->check(CLI::PositiveNumber);
  cmd->add_option("--array-file", a.array_file, "Array description (JSON)")
      ->check(CLI::ExistingFile);
}

void add_design_options(CLI::App* cmd, DesignSpec& d, bool single) {
  if (single) {
    cmd->add_option("--weights", d.weights, "Weight class")
        ->check(CLI::IsMember({"complex", "real"}))
        ->capture_default_str();
    cmd->add_option("--cost", d.cost, "Cost function")
        ->check(CLI::IsMember({"sin", "linear", "uniform", "step"}))
        ->capture_default_str();
  }
  cmd->add_option("--method", d.method, "Design criterion")
      ->check(CLI::IsMember({"maxdir", "minsens"}))
      ->capture_default_str();
  cmd->add_option("--t0-db", d.t0_db, "Sensitivity cap in dB (real maxdir)");
  cmd->add_option("--step-theta0", d.step_theta0_deg, "Step cost edge in degrees")
      ->check(CLI::Range(0.0, 180.0))
      ->capture_default_str();
  cmd->add_option("--step-floor", d.step_floor, "Step cost value past the edge")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--mics", d.mics, "Microphones of a spherical array (default (N+1)^2)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--look-deg", d.look_theta_deg, "Look direction theta in degrees")
      ->check(CLI::Range(0.0, 180.0))
      ->capture_default_str();
  cmd->add_option("--look-phi-deg", d.look_phi_deg, "Look direction phi in degrees")
      ->capture_default_str();
}

ArraySpec resolve(const ArraySpec& a) {
  if (a.array_file.empty())
    return a;
  return load_array_spec(a.array_file);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-weighted and complex beamformer design for linear, open and spherical arrays",
               "realbf"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  GlobalOptions g;
  std::string out = ".";
  app.add_option("--out", out, "Output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "Random seed for noisy scenarios")->capture_default_str();
  app.add_flag("--quiet", g.quiet, "Suppress stdout summaries");

  ArraySpec array;
  DesignSpec design;
  bool weights_csv = false;
  auto* design_cmd = app.add_subcommand("design", "Design one beamformer and report its measures");
  add_array_options(design_cmd, array);
  add_design_options(design_cmd, design, true);
  design_cmd->add_flag("--weights-csv", weights_csv, "Also write weights.csv");

  ArraySpec p_array;
  DesignSpec p_design;
  PatternSpec pattern;
  auto* pattern_cmd = app.add_subcommand("pattern", "Export beampatterns and lobe reports");
  add_array_options(pattern_cmd, p_array);
  add_design_options(pattern_cmd, p_design, false);
  pattern_cmd->add_option("--weights", pattern.weights, "Weight classes")
      ->delimiter(',')
      ->check(CLI::IsMember({"complex", "real"}));
  pattern_cmd->add_option("--cost", pattern.costs, "Cost functions")
      ->delimiter(',')
      ->check(CLI::IsMember({"sin", "linear", "uniform", "step"}));
  pattern_cmd->add_option("--step-deg", pattern.step_deg, "Grid step in degrees")
      ->check(CLI::Range(1e-4, 0.1))
      ->capture_default_str();

  SweepSpec sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Spherical-array measures over a kr range");
  sweep_cmd->add_option("--n", sweep.n, "Array order")->check(CLI::Range(0, 200))->capture_default_str();
  sweep_cmd->add_option("--kr-min", sweep.kr_min)->check(CLI::PositiveNumber)->capture_default_str();
  sweep_cmd->add_option("--kr-max", sweep.kr_max)->check(CLI::PositiveNumber)->capture_default_str();
  sweep_cmd->add_option("--kr-step", sweep.kr_step)->check(CLI::PositiveNumber)->capture_default_str();
  sweep_cmd->add_option("--mics", sweep.mics)->check(CLI::NonNegativeNumber);

  Table1Spec table;
  auto* table_cmd = app.add_subcommand("table1", "Cost-function comparison table");
  table_cmd->add_option("--n", table.n)->check(CLI::Range(0, 200))->capture_default_str();
  table_cmd->add_option("--kr", table.kr)->check(CLI::PositiveNumber)->capture_default_str();
  table_cmd->add_option("--mics", table.mics)->check(CLI::NonNegativeNumber);
  table_cmd->add_option("--step-theta0", table.step_theta0_deg)
      ->check(CLI::Range(0.0, 180.0))
      ->capture_default_str();
  table_cmd->add_option("--step-floor", table.step_floor)->check(CLI::PositiveNumber)->capture_default_str();

  PwdSpec pwd;
  auto* pwd_cmd = app.add_subcommand("pwd", "Plane-wave decomposition maps for a scenario");
  pwd_cmd->add_option("--scenario", pwd.scenario, "Scenario JSON (default: built-in)")
      ->check(CLI::ExistingFile);
  pwd_cmd->add_option("--beamformer", pwd.beamformer)
      ->check(CLI::IsMember({"complex", "real", "linear", "all"}))
      ->capture_default_str();
  pwd_cmd->add_option("--grid-step-deg", pwd.grid_step_deg)
      ->check(CLI::Range(0.1, 30.0))
      ->capture_default_str();

  LayoutSpec layout;
  auto* layout_cmd = app.add_subcommand("layout-gen", "Write a sphere sampling layout");
  layout_cmd->add_option("--kind", layout.kind)
      ->check(CLI::IsMember({"fibonacci", "gauss"}))
      ->capture_default_str();
  layout_cmd->add_option("--points", layout.m, "Points of a Fibonacci layout")
      ->check(CLI::Range(1, 1000000))
      ->capture_default_str();
  layout_cmd->add_option("--order", layout.n, "Order of a Gauss layout")
      ->check(CLI::Range(0, 200))
      ->capture_default_str();
  layout_cmd->add_option("--output", layout.output, "Output file (default <out>/layout.json)");

  std::string bundle = "all";
  std::vector<std::string> bundles = reproduce_bundles();
  bundles.push_back("all");
  auto* repro_cmd = app.add_subcommand("reproduce", "Regenerate a bundle of reference outputs");
  repro_cmd->add_option("bundle", bundle, "Bundle name")
      ->check(CLI::IsMember(bundles))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  g.out = out;

  try {
    if (*design_cmd)
      return cmd_design(resolve(array), design, weights_csv, g);
    if (*pattern_cmd)
      return cmd_pattern(resolve(p_array), p_design, pattern, g);
    if (*sweep_cmd)
      return cmd_sweep(sweep, g);
    if (*table_cmd)
      return cmd_table1(table, g);
    if (*pwd_cmd)
      return cmd_pwd(pwd, g);
    if (*layout_cmd)
      return cmd_layout_gen(layout, g);
    if (*repro_cmd)
      return cmd_reproduce(bundle, g);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
