#include "realbf/analysis.hpp"

#include "realbf/errors.hpp"
#include "realbf/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace realbf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPlateauEps = 1e-12;
constexpr double kParasiticDb = 0.5;

double rad2deg(double r) { return r * 180.0 / kPi; }

double db20(double ratio) { return std::max(20.0 * std::log10(ratio), kDbFloor); }

void check_weights(const WeightVector& w, const ArrayModel& model) {
  const bool phase_mode = w.domain == Domain::phase_mode;
  if (phase_mode != (model.kind() == ArrayKind::spherical))
    throw DomainError("weight domain does not match the array model");
  if (w.size() != model.manifold_size())
    throw DomainError("weight length " + std::to_string(w.size()) +
                      " does not match the manifold size " +
                      std::to_string(model.manifold_size()));
}

// Manifold at a look direction: phase-mode arrays are evaluated at Theta = 0.
Eigen::VectorXcd look_manifold(const ArrayModel& model, const Direction& look) {
  if (model.kind() == ArrayKind::spherical)
    return manifold(model, {0.0, 0.0});
  return manifold(model, look);
}

cplx response(const Eigen::VectorXcd& w, const Eigen::VectorXcd& v) {
  return (w.transpose() * v).value();
}

std::FILE* open_csv(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f)
    throw InputError("cannot write " + path.string());
  return f;
}

} // namespace

double directivity(const Eigen::VectorXcd& w, const Eigen::VectorXcd& b,
                   const Eigen::MatrixXcd& c_sin) {
  if (w.size() != b.size() || c_sin.rows() != w.size())
    throw DomainError("directivity: size mismatch");
  const double num = std::norm(response(w, b));
  const double den = std::real((w.transpose() * c_sin * w.conjugate()).value());
  if (!(den > 0.0))
    throw NumericError("directivity: zero output power over the sphere");
  return num / den;
}

double sensitivity(const Eigen::VectorXcd& w, const Eigen::MatrixXd& metric) {
  if (metric.rows() != w.size() || metric.cols() != w.size())
    throw DomainError("sensitivity: size mismatch");
  return std::real(w.dot(metric.cast<cplx>() * w));
}

double to_db10(double power_ratio) {
  if (!(power_ratio > 0.0))
    return kDbFloor;
  return std::max(10.0 * std::log10(power_ratio), kDbFloor);
}

BeampatternGrid beampattern(const WeightVector& w, const ArrayModel& model, const GridSpec& spec) {
  check_weights(w, model);
  BeampatternGrid g;
  g.look_response = response(w.values, look_manifold(model, w.look));
  const double ref = std::abs(g.look_response);
  if (!(ref > 0.0))
    throw NumericError("beampattern: zero response in the look direction");

  if (model.kind() == ArrayKind::open) {
    if (!(spec.theta_step_deg > 0.0) || !(spec.phi_step_deg > 0.0))
      throw DomainError("grid steps must be positive");
    const int nt = static_cast<int>(std::lround(180.0 / spec.theta_step_deg)) + 1;
    const int np = static_cast<int>(std::lround(360.0 / spec.phi_step_deg));
    g.theta_count = nt;
    g.phi_count = np;
    for (int i = 0; i < nt; ++i)
      for (int j = 0; j < np; ++j)
        g.angles.push_back({std::min(kPi, i * kPi / (nt - 1)), 2.0 * kPi * j / np});
  } else {
    if (!(spec.step_deg > 0.0))
      throw DomainError("grid step must be positive");
    const int n = static_cast<int>(std::lround(180.0 / spec.step_deg));
    std::vector<double> th;
    for (int i = 0; i <= n; ++i)
      th.push_back(std::min(kPi, i * kPi / n));
    // Make sure the look angle and its mirror are sampled exactly.
    if (model.kind() == ArrayKind::linear) {
      th.push_back(w.look.theta);
      th.push_back(kPi - w.look.theta);
    }
    std::sort(th.begin(), th.end());
    th.erase(std::unique(th.begin(), th.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             th.end());
    g.theta_count = static_cast<int>(th.size());
    for (double t : th)
      g.angles.push_back({t, 0.0});
  }

  g.response.resize(static_cast<Eigen::Index>(g.angles.size()));
  g.magnitude_db.resize(g.angles.size());
  for (std::size_t i = 0; i < g.angles.size(); ++i) {
    const cplx b = response(w.values, manifold(model, g.angles[i]));
    g.response[static_cast<Eigen::Index>(i)] = b;
    g.magnitude_db[i] = db20(std::abs(b) / ref);
  }
  return g;
}

LobeReport lobe_analysis(const BeampatternGrid& grid, double look_theta) {
  if (grid.two_dimensional())
    throw InputError("lobe analysis needs a 1-D pattern");
  const auto& a = grid.angles;
  const auto& m = grid.magnitude_db;
  const std::size_t n = a.size();
  if (n < 3)
    throw InputError("pattern has too few samples");
  for (std::size_t i = 1; i < n; ++i)
    if (a[i].theta - a[i - 1].theta > kPi / 1800.0 + 1e-12)
      throw InputError("grid too coarse for lobe analysis (step above 0.1 degree)");

  std::size_t look = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(a[i].theta - look_theta) < std::abs(a[look].theta - look_theta))
      look = i;

  // The peak can sit a few samples off the look angle: climb to it, then
  // descend to the first local minimum.
  std::size_t left = look;
  while (left > 0 && m[left - 1] > m[left] + kPlateauEps)
    --left;
  while (left > 0 && m[left - 1] <= m[left] + kPlateauEps)
    --left;
  std::size_t right = look;
  while (right + 1 < n && m[right + 1] > m[right] + kPlateauEps)
    ++right;
  while (right + 1 < n && m[right + 1] <= m[right] + kPlateauEps)
    ++right;

  LobeReport r;
  r.mainlobe_left = a[left].theta;
  r.mainlobe_right = a[right].theta;
  // A look direction on the grid edge has a mirrored mainlobe.
  if (look == 0)
    r.mainlobe_width = 2.0 * (r.mainlobe_right - a[look].theta);
  else if (look == n - 1)
    r.mainlobe_width = 2.0 * (a[look].theta - r.mainlobe_left);
  else
    r.mainlobe_width = r.mainlobe_right - r.mainlobe_left;

  const double look_db = m[look];
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= left && i <= right)
      continue;
    const bool rises_in = i == 0 || m[i] >= m[i - 1];
    const bool falls_out = i == n - 1 || m[i] > m[i + 1];
    // edge samples count only when the lobe is cut by the grid boundary
    const bool edge_peak = (i == 0 && m[0] > m[1]) || (i == n - 1 && m[n - 1] > m[n - 2]);
    if (!((i > 0 && i < n - 1 && rises_in && falls_out) || edge_peak))
      continue;
    const Lobe lobe{a[i].theta, m[i]};
    r.lobes.push_back(lobe);
    if (m[i] >= look_db - kParasiticDb) {
      if (!r.parasitic_lobe || lobe.level_db > r.parasitic_lobe->level_db)
        r.parasitic_lobe = lobe;
      continue;
    }
    if (m[i] > r.sidelobe_level_db) {
      r.sidelobe_level_db = m[i];
      r.sidelobe_angle = a[i].theta;
    }
  }
  return r;
}

double directivity_by_quadrature(const WeightVector& w, const ArrayModel& model,
                                 const Direction& look, int theta_nodes) {
  check_weights(w, model);
  const double peak = std::norm(response(w.values, look_manifold(model, look)));
  double extent = 0.0;
  if (model.kind() == ArrayKind::linear) {
    const auto& g = model.linear_geometry();
    extent = g.spacing * (g.sensors - 1);
  } else if (model.kind() == ArrayKind::open) {
    for (const auto& p : model.open_geometry().positions)
      extent = std::max(extent, p.norm());
  }
  int q = theta_nodes;
  if (q <= 0) {
    q = model.kind() == ArrayKind::spherical
            ? 4 * (model.spherical_geometry().order + 1) + 32
            : 32 + static_cast<int>(std::ceil(2.0 * model.acoustics().wavenumber() * extent));
  }
  const auto rule = specfun::gauss_legendre(q, 0.0, kPi);
  const int np = model.kind() == ArrayKind::open ? 2 * q : 1;
  double power = 0.0; // Int |B|^2 dOmega
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = rule.nodes[i];
    double ring = 0.0;
    for (int j = 0; j < np; ++j)
      ring += std::norm(response(w.values, manifold(model, {t, 2.0 * kPi * j / np})));
    power += rule.weights[i] * std::sin(t) * ring * (2.0 * kPi / np);
  }
  if (!(power > 0.0))
    throw NumericError("directivity: zero output power over the sphere");
  return 4.0 * kPi * peak / power;
}

void write_pattern_csv(const BeampatternGrid& grid, const std::filesystem::path& path) {
  if (grid.two_dimensional()) {
    write_map_csv(grid.angles, grid.magnitude_db, path);
    return;
  }
  std::FILE* f = open_csv(path);
  std::fprintf(f, "angle_deg,re,im,mag_db\n");
  for (std::size_t i = 0; i < grid.angles.size(); ++i) {
    const cplx b = grid.response[static_cast<Eigen::Index>(i)];
    std::fprintf(f, "%.6f,%.12g,%.12g,%.9f\n", rad2deg(grid.angles[i].theta), b.real(), b.imag(),
                 grid.magnitude_db[i]);
  }
  std::fclose(f);
}

void write_map_csv(const std::vector<Direction>& angles, const std::vector<double>& values_db,
                   const std::filesystem::path& path) {
  if (angles.size() != values_db.size())
    throw DomainError("write_map_csv: size mismatch");
  std::FILE* f = open_csv(path);
  std::fprintf(f, "theta_deg,phi_deg,mag_db\n");
  for (std::size_t i = 0; i < angles.size(); ++i)
    std::fprintf(f, "%.6f,%.6f,%.9f\n", rad2deg(angles[i].theta), rad2deg(angles[i].phi),
                 values_db[i]);
  std::fclose(f);
}

} // namespace realbf
