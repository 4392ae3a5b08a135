#include "realbf/pwd.hpp"

#include "realbf/analysis.hpp"
#include "realbf/errors.hpp"
#include "realbf/specfun.hpp"

#include <json.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace realbf {

namespace {

constexpr double kPi = std::numbers::pi;

int sh_count(int order) { return (order + 1) * (order + 1); }

double deg2rad(double d) { return d * kPi / 180.0; }

Eigen::MatrixXcd sh_matrix(const SamplingLayout& layout, int order) {
  Eigen::MatrixXcd y(layout.size(), sh_count(order));
  for (int i = 0; i < layout.size(); ++i) {
    const auto row = specfun::sph_harmonics_all(order, layout.points[i].theta,
                                                layout.points[i].phi);
    for (int k = 0; k < sh_count(order); ++k)
      y(i, k) = row[static_cast<std::size_t>(k)];
  }
  return y;
}

} // namespace

int default_synthesis_order(double kr) { return static_cast<int>(std::ceil(kr)) + 4; }

PressureSnapshot simulate_pressure(const Direction& source, double kr,
                                   const SamplingLayout& layout, int synthesis_order,
                                   std::optional<NoiseSpec> noise) {
  if (synthesis_order < 0)
    throw DomainError("synthesis order must be >= 0");
  if (!(kr > 0.0))
    throw DomainError("kr must be positive");
  const auto b = specfun::mode_strength_spectrum(synthesis_order, kr).values;
  const auto ysrc = specfun::sph_harmonics_all(synthesis_order, source.theta, source.phi);

  PressureSnapshot s;
  s.kr = kr;
  s.true_source = source;
  s.synthesis_order = synthesis_order;
  s.pressures.resize(layout.size());
  for (int i = 0; i < layout.size(); ++i) {
    const auto yi = specfun::sph_harmonics_all(synthesis_order, layout.points[i].theta,
                                               layout.points[i].phi);
    cplx acc{0.0, 0.0};
    for (int n = 0; n <= synthesis_order; ++n)
      for (int m = -n; m <= n; ++m)
        acc += b[n] * std::conj(ysrc[specfun::sh_index(n, m)]) * yi[specfun::sh_index(n, m)];
    s.pressures[i] = acc;
  }
  if (!s.pressures.allFinite())
    throw NumericError("simulated pressure is not finite");

  if (noise) {
    const double power = s.pressures.squaredNorm() / static_cast<double>(layout.size());
    const double sigma = std::sqrt(power * std::pow(10.0, -noise->snr_db / 10.0) / 2.0);
    std::mt19937_64 rng(noise->seed);
    std::normal_distribution<double> g(0.0, sigma);
    for (int i = 0; i < layout.size(); ++i) {
      const double re = g(rng);
      const double im = g(rng);
      s.pressures[i] += cplx{re, im};
    }
  }
  return s;
}

SftResult sft_pinv(const PressureSnapshot& snapshot, const SamplingLayout& layout, int order) {
  if (order < 0)
    throw DomainError("order must be >= 0");
  if (snapshot.pressures.size() != layout.size())
    throw InputError("snapshot and layout sizes differ");
  if (layout.size() < sh_count(order))
    throw InputError("layout with " + std::to_string(layout.size()) +
                     " points cannot resolve order " + std::to_string(order));
  const Eigen::MatrixXcd y = sh_matrix(layout, order);
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  SftResult r;
  r.order = order;
  r.condition_number = sv.minCoeff() > 0.0 ? sv.maxCoeff() / sv.minCoeff()
                                           : std::numeric_limits<double>::infinity();
  if (!(r.condition_number <= kSftMaxCondition))
    throw SingularMatrixError("spherical-harmonic matrix is ill-conditioned (cond " +
                              std::to_string(r.condition_number) + ")");
  r.ill_conditioned = r.condition_number > kSftWarnCondition;
  r.coefficients = svd.solve(snapshot.pressures);
  const double norm = snapshot.pressures.norm();
  r.residual = norm > 0.0 ? (y * r.coefficients - snapshot.pressures).norm() / norm : 0.0;
  return r;
}

std::vector<double> PwdMap::intensity_db() const {
  std::vector<double> out;
  out.reserve(intensity.size());
  for (double v : intensity)
    out.push_back(to_db10(v));
  return out;
}

PwdMap pwd_map(const Eigen::VectorXcd& coefficients, const Eigen::VectorXcd& phase_mode_weights,
               double step_deg) {
  const int order = static_cast<int>(phase_mode_weights.size()) - 1;
  if (order < 0 || coefficients.size() != sh_count(order))
    throw DomainError("pwd_map: need (N+1)^2 coefficients for N+1 weights");
  if (!(step_deg > 0.0))
    throw DomainError("pwd_map: grid step must be positive");

  PwdMap map;
  map.theta_count = static_cast<int>(std::lround(180.0 / step_deg)) + 1;
  map.phi_count = static_cast<int>(std::lround(360.0 / step_deg));
  const int nt = map.theta_count;
  const int np = map.phi_count;

  Eigen::VectorXcd weighted(coefficients.size());
  for (int n = 0; n <= order; ++n)
    for (int m = -n; m <= n; ++m)
      weighted[specfun::sh_index(n, m)] =
          coefficients[specfun::sh_index(n, m)] * phase_mode_weights[n];

  std::vector<double> power;
  map.field.reserve(static_cast<std::size_t>(nt) * np);
  power.reserve(static_cast<std::size_t>(nt) * np);
  for (int i = 0; i < nt; ++i) {
    const double theta = std::min(kPi, i * kPi / (nt - 1));
    for (int j = 0; j < np; ++j) {
      const double phi = 2.0 * kPi * j / np;
      const auto y = specfun::sph_harmonics_all(order, theta, phi);
      cplx acc{0.0, 0.0};
      for (int k = 0; k < sh_count(order); ++k)
        acc += weighted[k] * y[static_cast<std::size_t>(k)];
      map.angles.push_back({theta, phi});
      map.field.push_back(acc);
      power.push_back(std::norm(acc));
    }
  }
  const auto top = std::max_element(power.begin(), power.end());
  if (!(*top > 0.0))
    throw NumericError("pwd_map: zero output everywhere");
  const double peak_power = *top;
  map.intensity.reserve(power.size());
  for (double p : power)
    map.intensity.push_back(p / peak_power);
  map.peak = {map.angles[static_cast<std::size_t>(top - power.begin())], 0.0};

  // Local maxima over the 8-neighbourhood, phi wrapping around; a pole row
  // is a single point whose neighbours are the whole adjacent row.
  const auto at = [&](int i, int j) {
    return map.intensity[static_cast<std::size_t>(i) * np + static_cast<std::size_t>((j + np) % np)];
  };
  std::vector<PwdPeak> maxima;
  for (int i = 0; i < nt; ++i) {
    const bool pole = i == 0 || i == nt - 1;
    for (int j = 0; j < (pole ? 1 : np); ++j) {
      const double v = at(i, j);
      bool is_max = true;
      for (int di = -1; di <= 1 && is_max; ++di) {
        const int ii = i + di;
        if (ii < 0 || ii >= nt || di == 0)
          continue;
        if (pole) {
          for (int jj = 0; jj < np && is_max; ++jj)
            is_max = v >= at(ii, jj);
        } else {
          for (int dj = -1; dj <= 1 && is_max; ++dj)
            is_max = v >= at(ii, j + dj);
        }
      }
      if (!pole)
        is_max = is_max && v >= at(i, j - 1) && v >= at(i, j + 1);
      if (is_max)
        maxima.push_back({map.angles[static_cast<std::size_t>(i) * np + j], to_db10(v)});
    }
  }
  const double exclusion = 2.0 * deg2rad(step_deg);
  for (const auto& m : maxima) {
    if (angle_between(m.direction, map.peak.direction) <= exclusion)
      continue;
    if (!map.secondary_peak || m.relative_db > map.secondary_peak->relative_db)
      map.secondary_peak = m;
  }
  return map;
}

double Scenario::kr() const { return 2.0 * kPi * frequency_hz * radius_m / sound_speed; }

Scenario scenario_from_json_text(const std::string& text, const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw InputError("scenario must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (key != "source" && key != "f_hz" && key != "r_m" && key != "N" && key != "layout_path" &&
        key != "noise_snr_db")
      throw InputError("unknown scenario field '" + key + "'");
  for (const char* key : {"source", "f_hz", "r_m", "N", "layout_path"})
    if (!j.contains(key))
      throw InputError(std::string("scenario is missing field '") + key + "'");

  const auto& src = j["source"];
  if (!src.is_array() || src.size() != 2 || !src[0].is_number() || !src[1].is_number())
    throw InputError("scenario source must be [theta_deg, phi_deg]");
  const double theta_deg = src[0].get<double>();
  if (!(theta_deg >= 0.0 && theta_deg <= 180.0))
    throw InputError("scenario source theta must lie in [0, 180] degrees");
  if (!j["f_hz"].is_number() || !j["r_m"].is_number() || !j["N"].is_number_integer() ||
      !j["layout_path"].is_string())
    throw InputError("scenario fields have the wrong type");

  Scenario s;
  s.source = direction_from_degrees(theta_deg, src[1].get<double>());
  s.frequency_hz = j["f_hz"].get<double>();
  s.radius_m = j["r_m"].get<double>();
  s.order = j["N"].get<int>();
  if (!(s.frequency_hz > 0.0) || !(s.radius_m > 0.0) || s.order < 0)
    throw InputError("scenario needs f_hz > 0, r_m > 0 and N >= 0");
  std::filesystem::path layout = j["layout_path"].get<std::string>();
  s.layout_path = layout.is_absolute() ? layout : base_dir / layout;
  if (j.contains("noise_snr_db")) {
    if (!j["noise_snr_db"].is_number())
      throw InputError("noise_snr_db must be a number");
    s.noise_snr_db = j["noise_snr_db"].get<double>();
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw InputError("cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json_text(ss.str(), path.parent_path());
}

} // namespace realbf
