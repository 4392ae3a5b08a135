#include "realbf_cli.hpp"

#include "realbf/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

namespace realbf::cli {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double rad2deg(double r) { return r * 180.0 / kPi; }

json degrees(const Direction& d) { return json::array({rad2deg(d.theta), rad2deg(d.phi)}); }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw InputError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InputError("cannot write " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

void prepare(const GlobalOptions& g) { std::filesystem::create_directories(g.out); }

void say(const GlobalOptions& g, const std::string& line) {
  if (!g.quiet)
    std::cout << line << '\n';
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      ok = ok || key == a;
    if (!ok)
      throw InputError("unknown " + what + " field '" + key + "'");
  }
}

template <class T> T field(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key))
    throw InputError(what + " is missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(what + " field '" + key + "' has the wrong type");
  }
}

double db10_or_nan(double v) { return v > 0.0 ? 10.0 * std::log10(v) : kNaN; }

DesignResult design_with(const DesignProblem& p, const std::string& weights,
                         const std::string& method) {
  if (method == "maxdir")
    return weights == "real" ? max_directivity_real(p) : max_directivity_complex(p);
  if (method == "minsens")
    return weights == "real" ? min_sensitivity_real(p) : min_sensitivity_complex(p);
  throw InputError("unknown method '" + method + "'");
}

} // namespace

ArrayModel ArraySpec::build() const {
  if (kind == "linear")
    return ArrayModel::linear(m, d, f, c);
  if (kind == "spherical") {
    if (kr > 0.0)
      return ArrayModel::spherical_kr(n, kr, c);
    if (!(r > 0.0))
      throw InputError("spherical array needs --kr or --r with --f");
    return ArrayModel::spherical(n, r, f, c);
  }
  if (kind == "open") {
    if (positions.empty())
      throw InputError("open array needs positions (use --array-file)");
    return ArrayModel::open(positions, f, c);
  }
  throw InputError("unknown array kind '" + kind + "'");
}

json ArraySpec::to_json() const {
  json j{{"kind", kind}, {"c", c}};
  if (kind == "linear") {
    j["m"] = m;
    j["d"] = d;
    j["f_hz"] = f;
  } else if (kind == "spherical") {
    j["n"] = n;
    if (kr > 0.0) {
      j["kr"] = kr;
    } else {
      j["r_m"] = r;
      j["f_hz"] = f;
    }
  } else {
    j["f_hz"] = f;
    json pos = json::array();
    for (const auto& p : positions)
      pos.push_back({p.x(), p.y(), p.z()});
    j["positions"] = pos;
  }
  return j;
}

ArraySpec array_spec_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("array file is not valid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw InputError("array file must hold a JSON object");
  const std::string what = "array file";
  ArraySpec s;
  s.kind = field<std::string>(j, "kind", what);
  if (j.contains("c"))
    s.c = field<double>(j, "c", what);
  if (s.kind == "linear") {
    check_keys(j, {"kind", "m", "d", "f_hz", "c"}, what);
    s.m = field<int>(j, "m", what);
    s.d = field<double>(j, "d", what);
    s.f = field<double>(j, "f_hz", what);
  } else if (s.kind == "spherical") {
    check_keys(j, {"kind", "n", "kr", "r_m", "f_hz", "c"}, what);
    s.n = field<int>(j, "n", what);
    if (j.contains("kr")) {
      if (j.contains("r_m"))
        throw InputError("array file: give either kr or r_m, not both");
      s.kr = field<double>(j, "kr", what);
      if (!(s.kr > 0.0))
        throw InputError("array file: kr must be positive");
    } else {
      s.r = field<double>(j, "r_m", what);
      s.f = field<double>(j, "f_hz", what);
    }
  } else if (s.kind == "open") {
    check_keys(j, {"kind", "positions", "f_hz", "c"}, what);
    s.f = field<double>(j, "f_hz", what);
    const auto pos = field<std::vector<std::vector<double>>>(j, "positions", what);
    for (const auto& p : pos) {
      if (p.size() != 3)
        throw InputError("array file: each position needs three coordinates");
      s.positions.emplace_back(p[0], p[1], p[2]);
    }
  } else {
    throw InputError("array file: unknown kind '" + s.kind + "'");
  }
  return s;
}

ArraySpec load_array_spec(const std::filesystem::path& path) {
  return array_spec_from_json_text(read_text(path));
}

CostFunction DesignSpec::cost_function() const {
  return CostFunction::parse(cost, step_theta0_deg * kPi / 180.0, step_floor);
}

Direction DesignSpec::look() const { return direction_from_degrees(look_theta_deg, look_phi_deg); }

json DesignSpec::to_json() const {
  json j{{"weights", weights}, {"method", method}, {"cost", cost},
         {"look_deg", json::array({look_theta_deg, look_phi_deg})},
         {"mics", mics}, {"t0_db", nullptr}};
  if (cost == "step") {
    j["step_theta0_deg"] = step_theta0_deg;
    j["step_floor"] = step_floor;
  }
  if (t0_db)
    j["t0_db"] = *t0_db;
  return j;
}

DesignResult run_design(const ArrayModel& model, const DesignSpec& spec) {
  if (spec.weights != "real" && spec.weights != "complex")
    throw InputError("--weights must be real or complex");
  const auto problem = make_problem(model, spec.look(), spec.cost_function(), spec.mics);
  if (spec.t0_db) {
    if (spec.weights != "real" || spec.method != "maxdir")
      throw InputError("--t0-db applies to real maximum-directivity designs only");
    return bounded_sensitivity_real(problem, std::pow(10.0, *spec.t0_db / 10.0));
  }
  return design_with(problem, spec.weights, spec.method);
}

json design_result_json(const DesignResult& r) {
  json w = json::array();
  for (Eigen::Index i = 0; i < r.weights.size(); ++i) {
    const cplx v = r.weights.values[i];
    if (r.weights.is_real())
      w.push_back(v.real());
    else
      w.push_back({v.real(), v.imag()});
  }
  return json{{"method", r.method},
              {"value_class", to_string(r.weights.value_class)},
              {"domain", to_string(r.weights.domain)},
              {"weights", w},
              {"phase_phi", r.phase_phi},
              {"beta", r.beta},
              {"directivity", r.directivity},
              {"directivity_index_db", r.directivity_index_db},
              {"sensitivity", r.sensitivity},
              {"sensitivity_db", r.sensitivity_db},
              {"bound_complex", r.bound_complex},
              {"bound_complex_db", db10_or_nan(r.bound_complex)},
              {"bound_real", r.bound_real},
              {"bound_real_db", db10_or_nan(r.bound_real)},
              {"condition_number", r.condition_number}};
}

json lobe_report_json(const LobeReport& r) {
  json j{{"mainlobe_left_deg", rad2deg(r.mainlobe_left)},
         {"mainlobe_right_deg", rad2deg(r.mainlobe_right)},
         {"mainlobe_width_deg", rad2deg(r.mainlobe_width)},
         {"sidelobe_level_db", r.sidelobe_level_db},
         {"sidelobe_angle_deg", rad2deg(r.sidelobe_angle)},
         {"parasitic_lobe", nullptr}};
  if (r.parasitic_lobe)
    j["parasitic_lobe"] = {{"angle_deg", rad2deg(r.parasitic_lobe->angle)},
                           {"level_db", r.parasitic_lobe->level_db}};
  return j;
}

std::string config_hash(const json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json meta_block(const std::string& command, const json& config) {
  return json{{"tool", "realbf"},
              {"version", kVersion},
              {"command", command},
              {"config_hash", config_hash(config)}};
}

int cmd_design(const ArraySpec& array, const DesignSpec& design, bool weights_csv,
               const GlobalOptions& g) {
  const auto model = array.build();
  const json config{{"array", array.to_json()}, {"design", design.to_json()}};
  const auto r = run_design(model, design);
  prepare(g);
  json out{{"meta", meta_block("design", config)}, {"config", config},
           {"result", design_result_json(r)}};
  write_json(g.out / "design.json", out);
  if (weights_csv) {
    std::FILE* f = std::fopen((g.out / "weights.csv").c_str(), "wb");
    if (!f)
      throw InputError("cannot write weights.csv");
    std::fprintf(f, "index,re,im\n");
    for (Eigen::Index i = 0; i < r.weights.size(); ++i)
      std::fprintf(f, "%d,%.17g,%.17g\n", static_cast<int>(i), r.weights.values[i].real(),
                   r.weights.values[i].imag());
    std::fclose(f);
  }
  say(g, out.dump(2));
  return 0;
}

int cmd_pattern(const ArraySpec& array, const DesignSpec& design, const PatternSpec& pattern,
                const GlobalOptions& g) {
  if (pattern.weights.empty() || pattern.costs.empty())
    throw InputError("pattern needs at least one weight class and one cost");
  const auto model = array.build();
  json config{{"array", array.to_json()},
              {"design", design.to_json()},
              {"pattern", {{"weights", pattern.weights},
                           {"costs", pattern.costs},
                           {"step_deg", pattern.step_deg}}}};
  config["design"].erase("weights");
  config["design"].erase("cost");

  // Validate every combination before computing anything.
  for (const auto& w : pattern.weights)
    if (w != "real" && w != "complex")
      throw InputError("unknown weight class '" + w + "'");
  for (const auto& c : pattern.costs) {
    DesignSpec d = design;
    d.cost = c;
    d.cost_function();
  }

  GridSpec grid;
  grid.step_deg = pattern.step_deg;
  grid.theta_step_deg = std::max(pattern.step_deg, 1.0);
  grid.phi_step_deg = std::max(pattern.step_deg, 1.0);

  prepare(g);
  json reports = json::object();
  for (const auto& w : pattern.weights) {
    for (const auto& c : pattern.costs) {
      DesignSpec d = design;
      d.weights = w;
      d.cost = c;
      const auto r = run_design(model, d);
      const auto bp = beampattern(r.weights, model, grid);
      const std::string name = w + "_" + c;
      write_pattern_csv(bp, g.out / ("pattern_" + name + ".csv"));
      json entry{{"directivity_index_db", r.directivity_index_db},
                 {"sensitivity_db", r.sensitivity_db},
                 {"lobes", nullptr}};
      if (!bp.two_dimensional()) {
        const double look = model.kind() == ArrayKind::spherical ? 0.0 : d.look().theta;
        const auto lobes = lobe_analysis(bp, look);
        entry["lobes"] = lobe_report_json(lobes);
        say(g, name + ": DI " + fmt("%.2f", r.directivity_index_db) + " dB, sidelobe " +
                   fmt("%.2f", lobes.sidelobe_level_db) + " dB");
      } else {
        say(g, name + ": DI " + fmt("%.2f", r.directivity_index_db) + " dB");
      }
      reports[name] = entry;
    }
  }
  write_json(g.out / "lobes.json",
             json{{"meta", meta_block("pattern", config)}, {"config", config},
                  {"patterns", reports}});
  return 0;
}

std::vector<SweepRow> sweep_rows(const SweepSpec& spec) {
  if (!(spec.kr_min > 0.0) || !(spec.kr_max >= spec.kr_min) || !(spec.kr_step > 0.0))
    throw InputError("sweep needs 0 < kr-min <= kr-max and kr-step > 0");
  const int count = static_cast<int>(std::floor((spec.kr_max - spec.kr_min) / spec.kr_step + 1e-9)) + 1;
  std::vector<SweepRow> rows;
  for (int i = 0; i < count; ++i) {
    SweepRow row;
    row.kr = spec.kr_min + i * spec.kr_step;
    try {
      const auto p = make_problem(ArrayModel::spherical_kr(spec.n, row.kr), {0.0, 0.0},
                                  CostFunction::sin(), spec.mics);
      const auto cm = max_directivity_complex(p);
      const auto rm = max_directivity_real(p);
      const auto cs = min_sensitivity_complex(p);
      const auto rs = min_sensitivity_real(p);
      row.di_complex_maxdir = cm.directivity_index_db;
      row.di_real_maxdir = rm.directivity_index_db;
      row.di_complex_minsens = cs.directivity_index_db;
      row.di_real_minsens = rs.directivity_index_db;
      row.sens_complex_maxdir_db = cm.sensitivity_db;
      row.sens_real_maxdir_db = rm.sensitivity_db;
      row.sens_complex_minsens_db = cs.sensitivity_db;
      row.sens_real_minsens_db = rs.sensitivity_db;
    } catch (const Error& e) {
      const double k = row.kr;
      row = SweepRow{k, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, e.what()};
    }
    rows.push_back(row);
  }
  return rows;
}

int cmd_sweep(const SweepSpec& spec, const GlobalOptions& g) {
  const auto rows = sweep_rows(spec);
  prepare(g);
  std::FILE* f = std::fopen((g.out / "sweep.csv").c_str(), "wb");
  if (!f)
    throw InputError("cannot write sweep.csv");
  std::fprintf(f, "kr,di_complex_maxdir,di_real_maxdir,di_complex_minsens,di_real_minsens,"
                  "sens_complex_maxdir_db,sens_real_maxdir_db,sens_complex_minsens_db,"
                  "sens_real_minsens_db\n");
  json warnings = json::array();
  for (const auto& r : rows) {
    std::fprintf(f, "%.6f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f\n", r.kr, r.di_complex_maxdir,
                 r.di_real_maxdir, r.di_complex_minsens, r.di_real_minsens,
                 r.sens_complex_maxdir_db, r.sens_real_maxdir_db, r.sens_complex_minsens_db,
                 r.sens_real_minsens_db);
    if (!r.warning.empty())
      warnings.push_back({{"kr", r.kr}, {"message", r.warning}});
  }
  std::fclose(f);
  if (!warnings.empty()) {
    const json config{{"n", spec.n}, {"kr_min", spec.kr_min}, {"kr_max", spec.kr_max},
                      {"kr_step", spec.kr_step}, {"mics", spec.mics}};
    write_json(g.out / "sweep_warnings.json",
               json{{"meta", meta_block("sweep", config)}, {"warnings", warnings}});
    if (!g.quiet)
      std::cerr << warnings.size() << " sweep point(s) failed, see sweep_warnings.json\n";
  }
  say(g, "sweep: " + std::to_string(rows.size()) + " points written to sweep.csv");
  return 0;
}

std::vector<Table1Row> table1_rows(const Table1Spec& spec) {
  const auto model = ArrayModel::spherical_kr(spec.n, spec.kr);
  std::vector<Table1Row> rows;
  for (const char* name : {"sin", "linear", "uniform", "step"}) {
    const auto cost = CostFunction::parse(name, spec.step_theta0_deg * kPi / 180.0, spec.step_floor);
    const auto p = make_problem(model, {0.0, 0.0}, cost, spec.mics);
    const auto r = max_directivity_real(p);
    const auto lobes = lobe_analysis(beampattern(r.weights, model), 0.0);
    rows.push_back({name, lobes.sidelobe_level_db, r.directivity_index_db, r.sensitivity_db,
                    r.sensitivity_db - 10.0 * std::log10(r.bound_real)});
  }
  return rows;
}

int cmd_table1(const Table1Spec& spec, const GlobalOptions& g) {
  const auto rows = table1_rows(spec);
  prepare(g);
  std::FILE* f = std::fopen((g.out / "table1.csv").c_str(), "wb");
  if (!f)
    throw InputError("cannot write table1.csv");
  std::fprintf(f, "cost,sidelobe_db,di_db,sens_db,sens_minus_bound_db\n");
  for (const auto& r : rows) {
    std::fprintf(f, "%s,%.6f,%.6f,%.6f,%.6f\n", r.cost.c_str(), r.sidelobe_db, r.di_db, r.sens_db,
                 r.sens_minus_bound_db);
    say(g, r.cost + ": sidelobe " + fmt("%.2f", r.sidelobe_db) + " dB, DI " +
               fmt("%.2f", r.di_db) + " dB, sensitivity " + fmt("%.2f", r.sens_db) + " dB (" +
               fmt("%+.2f", r.sens_minus_bound_db) + " dB above bound)");
  }
  std::fclose(f);
  return 0;
}

Scenario default_scenario() {
  Scenario s;
  s.source = direction_from_degrees(100.0, 160.0);
  s.frequency_hz = 2400.0;
  s.radius_m = 0.09;
  s.order = 4;
  return s;
}

std::vector<PwdRun> pwd_runs(const Scenario& scenario, const std::string& beamformer,
                             std::uint64_t seed, double grid_step_deg) {
  std::vector<std::string> names;
  if (beamformer == "all")
    names = {"complex", "real", "linear"};
  else if (beamformer == "complex" || beamformer == "real" || beamformer == "linear")
    names = {beamformer};
  else
    throw InputError("unknown beamformer '" + beamformer + "'");

  const auto layout =
      scenario.layout_path.empty() ? fibonacci_layout(32) : load_layout(scenario.layout_path);
  const double kr = scenario.kr();
  std::optional<NoiseSpec> noise;
  if (scenario.noise_snr_db)
    noise = NoiseSpec{*scenario.noise_snr_db, seed};
  const auto snap =
      simulate_pressure(scenario.source, kr, layout, default_synthesis_order(kr), noise);
  const auto sft = sft_pinv(snap, layout, scenario.order);
  const auto model = ArrayModel::spherical_kr(scenario.order, kr, scenario.sound_speed);

  std::vector<PwdRun> runs;
  for (const auto& name : names) {
    const auto cost = name == "linear" ? CostFunction::linear() : CostFunction::sin();
    const auto p = make_problem(model, scenario.source, cost, layout.size());
    const auto r = name == "complex" ? max_directivity_complex(p) : max_directivity_real(p);
    runs.push_back({name, pwd_map(sft.coefficients, r.weights.values, grid_step_deg), sft});
  }
  return runs;
}

int cmd_pwd(const PwdSpec& spec, const GlobalOptions& g) {
  const Scenario scenario = spec.scenario.empty() ? default_scenario() : load_scenario(spec.scenario);
  json sc{{"source_deg", degrees(scenario.source)},
          {"f_hz", scenario.frequency_hz},
          {"r_m", scenario.radius_m},
          {"N", scenario.order},
          {"layout", scenario.layout_path.empty() ? "fibonacci:32"
                                                  : scenario.layout_path.lexically_normal().string()},
          {"noise_snr_db", nullptr}};
  if (scenario.noise_snr_db)
    sc["noise_snr_db"] = *scenario.noise_snr_db;
  const json config{{"scenario", sc},
                    {"beamformer", spec.beamformer},
                    {"grid_step_deg", spec.grid_step_deg},
                    {"seed", g.seed}};

  const auto runs = pwd_runs(scenario, spec.beamformer, g.seed, spec.grid_step_deg);
  prepare(g);
  const Direction anti = antipode(scenario.source);
  json maps = json::object();
  for (const auto& run : runs) {
    write_map_csv(run.map.angles, run.map.intensity_db(), g.out / ("pwd_" + run.beamformer + ".csv"));
    json entry{{"peak_deg", degrees(run.map.peak.direction)},
               {"peak_error_deg", rad2deg(angle_between(run.map.peak.direction, scenario.source))},
               {"secondary", nullptr}};
    std::string line = run.beamformer + ": peak " + fmt("%.0f", rad2deg(run.map.peak.direction.theta)) +
                       "/" + fmt("%.0f", rad2deg(run.map.peak.direction.phi)) + " deg";
    if (run.map.secondary_peak) {
      const auto& s = *run.map.secondary_peak;
      entry["secondary"] = {{"direction_deg", degrees(s.direction)},
                            {"relative_db", s.relative_db},
                            {"distance_to_antipode_deg", rad2deg(angle_between(s.direction, anti))}};
      line += ", secondary " + fmt("%.0f", rad2deg(s.direction.theta)) + "/" +
              fmt("%.0f", rad2deg(s.direction.phi)) + " deg at " + fmt("%.2f", s.relative_db) + " dB";
    }
    maps[run.beamformer] = entry;
    say(g, line);
  }
  const auto& sft = runs.front().sft;
  if (sft.ill_conditioned && !g.quiet)
    std::cerr << "warning: spherical Fourier transform is ill-conditioned (cond "
              << sft.condition_number << ")\n";
  write_json(g.out / "pwd_peaks.json",
             json{{"meta", meta_block("pwd", config)},
                  {"config", config},
                  {"kr", scenario.kr()},
                  {"true_source_deg", degrees(scenario.source)},
                  {"antipode_deg", degrees(anti)},
                  {"sft", {{"order", sft.order},
                           {"condition_number", sft.condition_number},
                           {"residual", sft.residual},
                           {"ill_conditioned", sft.ill_conditioned}}},
                  {"maps", maps}});
  return 0;
}

int cmd_layout_gen(const LayoutSpec& spec, const GlobalOptions& g) {
  SamplingLayout layout;
  if (spec.kind == "fibonacci")
    layout = fibonacci_layout(spec.m);
  else if (spec.kind == "gauss")
    layout = gauss_layout(spec.n);
  else
    throw InputError("unknown layout kind '" + spec.kind + "'");
  std::filesystem::path path = spec.output;
  if (path.empty()) {
    prepare(g);
    path = g.out / "layout.json";
  } else if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  save_layout(layout, path);
  say(g, std::to_string(layout.size()) + " points written to " + path.string());
  return 0;
}

const std::vector<std::string>& reproduce_bundles() {
  static const std::vector<std::string> names{"linear-array", "sphere-real", "cost-functions",
                                              "kr-sweep",     "cost-table",  "pwd"};
  return names;
}

int cmd_reproduce(const std::string& bundle, const GlobalOptions& g) {
  if (bundle == "all") {
    for (const auto& name : reproduce_bundles())
      cmd_reproduce(name, g);
    return 0;
  }
  GlobalOptions sub = g;
  sub.out = g.out / bundle;

  ArraySpec sphere;
  sphere.kind = "spherical";
  sphere.n = 10;
  sphere.kr = 10.0;
  DesignSpec real;
  real.weights = "real";

  if (bundle == "linear-array") {
    ArraySpec lin; // M = 25, d = 0.1 m, 1715 Hz
    DesignSpec d = real;
    d.look_theta_deg = 45.0;
    PatternSpec p;
    p.weights = {"real", "complex"};
    cmd_pattern(lin, d, p, sub);
    return cmd_design(lin, d, true, sub);
  }
  if (bundle == "sphere-real") {
    cmd_pattern(sphere, real, PatternSpec{}, sub);
    return cmd_design(sphere, real, true, sub);
  }
  if (bundle == "cost-functions") {
    PatternSpec p;
    p.costs = {"linear", "uniform", "step"};
    return cmd_pattern(sphere, real, p, sub);
  }
  if (bundle == "kr-sweep")
    return cmd_sweep(SweepSpec{}, sub);
  if (bundle == "cost-table")
    return cmd_table1(Table1Spec{}, sub);
  if (bundle == "pwd")
    return cmd_pwd(PwdSpec{}, sub);
  throw InputError("unknown bundle '" + bundle + "'");
}

} // namespace realbf::cli
