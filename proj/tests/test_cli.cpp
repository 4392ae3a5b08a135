#include "doctest.h"

#include "realbf/errors.hpp"
#include "realbf_cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <unistd.h>

using namespace realbf;
using namespace realbf::cli;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("realbf_cli_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  return p;
}
} // namespace

TEST_CASE("array files") {
  const auto lin = array_spec_from_json_text(R"({"kind": "linear", "m": 8, "d": 0.05, "f_hz": 2000})");
  CHECK(lin.kind == "linear");
  CHECK(lin.m == 8);
  CHECK(lin.build().manifold_size() == 8);

  const auto sph = array_spec_from_json_text(R"({"kind": "spherical", "n": 4, "kr": 3})");
  CHECK(sph.build().kr() == doctest::Approx(3.0));
  const auto sph_r = array_spec_from_json_text(R"({"kind": "spherical", "n": 4, "r_m": 0.09, "f_hz": 2400})");
  CHECK(sph_r.build().kr() == doctest::Approx(2 * 3.141592653589793 * 2400 * 0.09 / 343));

  const auto open = array_spec_from_json_text(
      R"({"kind": "open", "f_hz": 1000, "positions": [[0, 0, 0], [0.1, 0, 0]]})");
  CHECK(open.build().manifold_size() == 2);

  CHECK_THROWS_AS(array_spec_from_json_text("{"), InputError);
  CHECK_THROWS_AS(array_spec_from_json_text(R"({"kind": "linear", "m": 8, "d": 0.05})"), InputError);
  CHECK_THROWS_AS(array_spec_from_json_text(R"({"kind": "linear", "m": 8, "d": 0.05, "f_hz": 1, "x": 1})"),
                  InputError);
  CHECK_THROWS_AS(array_spec_from_json_text(R"({"kind": "spherical", "n": 4, "kr": 3, "r_m": 0.1})"),
                  InputError);
  CHECK_THROWS_AS(array_spec_from_json_text(R"({"kind": "open", "f_hz": 1, "positions": [[0, 0]]})"),
                  InputError);
  CHECK_THROWS_AS(array_spec_from_json_text(R"({"kind": "ring"})"), InputError);
  CHECK_THROWS_AS(array_spec_from_json_text(R"({"kind": "linear", "m": "8", "d": 0.05, "f_hz": 1})"),
                  InputError);

  ArraySpec bad;
  bad.kind = "spherical";
  CHECK_THROWS_AS(bad.build(), InputError);
  bad.kind = "open";
  CHECK_THROWS_AS(bad.build(), InputError);
}

TEST_CASE("config hash") {
  const nlohmann::json a{{"x", 1}, {"y", "z"}};
  const nlohmann::json b{{"y", "z"}, {"x", 1}};
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(nlohmann::json{{"x", 2}, {"y", "z"}}));
  CHECK(config_hash(a).size() == 16);
  // FNV-1a of "{}"
  CHECK(config_hash(nlohmann::json::object()) == "08f44b07b5901a25");
}

TEST_CASE("design runs") {
  ArraySpec sphere;
  sphere.kind = "spherical";
  sphere.n = 10;
  sphere.kr = 10;
  DesignSpec d;
  d.weights = "real";
  d.t0_db = -30.0;
  CHECK_THROWS_AS(run_design(sphere.build(), d), InfeasibleError);
  d.t0_db = -18.0;
  const auto bounded = run_design(sphere.build(), d);
  CHECK(bounded.sensitivity_db <= -18.0 + 1e-6);
  d.weights = "complex";
  CHECK_THROWS_AS(run_design(sphere.build(), d), InputError);
  d.t0_db.reset();
  d.cost = "cosine";
  CHECK_THROWS_AS(run_design(sphere.build(), d), InputError);

  const auto out = scratch("design");
  GlobalOptions g;
  g.out = out;
  g.quiet = true;
  DesignSpec real;
  real.weights = "real";
  CHECK(cmd_design(sphere, real, true, g) == 0);
  const auto j = nlohmann::json::parse(slurp(out / "design.json"));
  CHECK(j["meta"]["config_hash"] == config_hash(j["config"]));
  CHECK(j["meta"]["command"] == "design");
  CHECK(j["result"]["weights"].size() == 11);
  CHECK(fs::exists(out / "weights.csv"));
  fs::remove_all(out);
}

TEST_CASE("sweep") {
  SweepSpec s;
  s.kr_min = 2;
  s.kr_max = 3;
  s.kr_step = 0.5;
  const auto rows = sweep_rows(s);
  REQUIRE(rows.size() == 3);
  CHECK(rows[2].kr == doctest::Approx(3.0));
  for (const auto& r : rows) {
    CHECK(r.warning.empty());
    CHECK(r.di_complex_maxdir > r.di_real_maxdir);
    CHECK(r.sens_complex_minsens_db <= r.sens_real_minsens_db);
  }
  s.kr_max = 1;
  CHECK_THROWS_AS(sweep_rows(s), InputError);
}

TEST_CASE("bundled data") {
  const fs::path data = REALBF_DATA_DIR;
  CHECK(slurp(data / "layouts" / "fibonacci32.json") == layout_to_json_text(fibonacci_layout(32)));
  CHECK(slurp(data / "layouts" / "gauss4.json") == layout_to_json_text(gauss_layout(4)));
  const auto s = load_scenario(data / "scenarios" / "default.json");
  const auto d = default_scenario();
  CHECK(angle_between(s.source, d.source) < 1e-12);
  CHECK(s.kr() == doctest::Approx(d.kr()).epsilon(1e-14));
  for (const char* f : {"linear25.json", "sphere_n10_kr10.json", "cross7.json"})
    CHECK_NOTHROW(load_array_spec(data / "arrays" / f).build());
}

TEST_CASE("pwd with noise depends on the seed only") {
  auto s = default_scenario();
  s.noise_snr_db = 10.0;
  const auto a = pwd_runs(s, "complex", 5, 6.0);
  const auto b = pwd_runs(s, "complex", 5, 6.0);
  const auto c = pwd_runs(s, "complex", 6, 6.0);
  CHECK(a[0].map.intensity == b[0].map.intensity);
  CHECK(a[0].map.intensity != c[0].map.intensity);
  CHECK_THROWS_AS(pwd_runs(s, "hybrid", 5, 6.0), InputError);
}

TEST_CASE("layout-gen and reproduce") {
  const auto out = scratch("repro");
  GlobalOptions g;
  g.out = out;
  g.quiet = true;
  LayoutSpec l;
  l.kind = "gauss";
  l.n = 3;
  CHECK(cmd_layout_gen(l, g) == 0);
  CHECK(load_layout(out / "layout.json").size() == 32);
  CHECK(cmd_reproduce("cost-table", g) == 0);
  CHECK(slurp(out / "cost-table" / "table1.csv").rfind("cost,sidelobe_db,di_db,sens_db,sens_minus_bound_db\n", 0) == 0);
  CHECK_THROWS_AS(cmd_reproduce("nothing", g), InputError);
  fs::remove_all(out);
}
