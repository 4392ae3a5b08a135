#pragma once

// Command implementations behind the `realbf` executable. Each cmd_* function
// validates its options, writes its files under GlobalOptions::out and
// returns a process exit code; errors propagate as realbf::Error.

#include "realbf/analysis.hpp"
#include "realbf/design.hpp"
#include "realbf/pwd.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace realbf::cli {

inline constexpr const char* kVersion = "0.1.0";

struct GlobalOptions {
  std::filesystem::path out = ".";
  std::uint64_t seed = 0;
  bool quiet = false;
};

/// Array description from inline flags or a JSON file (which takes precedence).
///   {"kind": "linear", "m", "d", "f_hz", "c"?}
///   {"kind": "spherical", "n", "kr"} or {"kind": "spherical", "n", "r_m", "f_hz", "c"?}
///   {"kind": "open", "positions": [[x, y, z], ...], "f_hz", "c"?}
struct ArraySpec {
  std::string kind = "linear";
  int m = 25;
  double d = 0.1;
  double f = 1715.0;
  double c = 343.0;
  int n = 10;
  double kr = 0.0; // spherical: used when > 0, otherwise r and f
  double r = 0.0;
  std::vector<Eigen::Vector3d> positions;
  std::filesystem::path array_file;

  ArrayModel build() const;
  nlohmann::json to_json() const;
};

ArraySpec array_spec_from_json_text(const std::string& text);
ArraySpec load_array_spec(const std::filesystem::path& path);

struct DesignSpec {
  std::string weights = "complex"; // complex | real
  std::string method = "maxdir";   // maxdir | minsens
  std::optional<double> t0_db;
  std::string cost = "sin";
  double step_theta0_deg = 18.0;
  double step_floor = 1e-3;
  int mics = 0;
  double look_theta_deg = 90.0;
  double look_phi_deg = 0.0;

  CostFunction cost_function() const;
  Direction look() const;
  nlohmann::json to_json() const;
};

DesignResult run_design(const ArrayModel& model, const DesignSpec& spec);
nlohmann::json design_result_json(const DesignResult& r);
nlohmann::json lobe_report_json(const LobeReport& r);

/// FNV-1a 64-bit hash of the canonical config dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);
nlohmann::json meta_block(const std::string& command, const nlohmann::json& config);

int cmd_design(const ArraySpec& array, const DesignSpec& design, bool weights_csv,
               const GlobalOptions& g);

struct PatternSpec {
  std::vector<std::string> weights{"real"};
  std::vector<std::string> costs{"sin"};
  double step_deg = 0.05;
};

int cmd_pattern(const ArraySpec& array, const DesignSpec& design, const PatternSpec& pattern,
                const GlobalOptions& g);

struct SweepSpec {
  int n = 10;
  double kr_min = 1.0;
  double kr_max = 10.0;
  double kr_step = 0.25;
  int mics = 0;
};

struct SweepRow {
  double kr = 0.0;
  double di_complex_maxdir = 0.0;
  double di_real_maxdir = 0.0;
  double di_complex_minsens = 0.0;
  double di_real_minsens = 0.0;
  double sens_complex_maxdir_db = 0.0;
  double sens_real_maxdir_db = 0.0;
  double sens_complex_minsens_db = 0.0;
  double sens_real_minsens_db = 0.0;
  std::string warning; // empty on success; values are NaN otherwise
};

std::vector<SweepRow> sweep_rows(const SweepSpec& spec);
int cmd_sweep(const SweepSpec& spec, const GlobalOptions& g);

struct Table1Spec {
  int n = 10;
  double kr = 10.0;
  int mics = 0;
  double step_theta0_deg = 18.0;
  double step_floor = 1e-3;
};

struct Table1Row {
  std::string cost;
  double sidelobe_db = 0.0;
  double di_db = 0.0;
  double sens_db = 0.0;
  double sens_minus_bound_db = 0.0;
};

std::vector<Table1Row> table1_rows(const Table1Spec& spec);
int cmd_table1(const Table1Spec& spec, const GlobalOptions& g);

struct PwdSpec {
  std::filesystem::path scenario; // empty: built-in default scenario
  std::string beamformer = "all"; // complex | real | linear | all
  double grid_step_deg = 2.0;
};

struct PwdRun {
  std::string beamformer;
  PwdMap map;
  SftResult sft;
};

/// Source (100, 160) deg, 2400 Hz, r = 9 cm, N = 4, 32-point Fibonacci layout.
Scenario default_scenario();
std::vector<PwdRun> pwd_runs(const Scenario& scenario, const std::string& beamformer,
                             std::uint64_t seed, double grid_step_deg);
int cmd_pwd(const PwdSpec& spec, const GlobalOptions& g);

struct LayoutSpec {
  std::string kind = "fibonacci"; // fibonacci | gauss
  int m = 32;                     // fibonacci
  int n = 4;                      // gauss
  std::filesystem::path output;   // default <out>/layout.json
};

int cmd_layout_gen(const LayoutSpec& spec, const GlobalOptions& g);

/// Named bundles of preset pattern, sweep, table and pwd runs.
const std::vector<std::string>& reproduce_bundles();
int cmd_reproduce(const std::string& bundle, const GlobalOptions& g);

} // namespace realbf::cli
