#include "realbf/geometry.hpp"

#include "realbf/errors.hpp"
#include "realbf/specfun.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace realbf {

namespace {

constexpr double kPi = std::numbers::pi;

void check_theta(double theta) {
  if (!std::isfinite(theta) || theta < -1e-12 || theta > kPi + 1e-12)
    throw DomainError("polar angle outside [0, pi]: " + std::to_string(theta));
}

void check_direction(const Direction& dir) {
  check_theta(dir.theta);
  if (!std::isfinite(dir.phi))
    throw DomainError("azimuth is not finite");
}

void check_physics(double frequency_hz, double sound_speed) {
  if (!(frequency_hz > 0.0) || !std::isfinite(frequency_hz))
    throw DomainError("frequency must be positive");
  if (!(sound_speed > 0.0) || !std::isfinite(sound_speed))
    throw DomainError("sound speed must be positive");
}

} // namespace

Direction direction_from_degrees(double theta_deg, double phi_deg) {
  return {theta_deg * kPi / 180.0, phi_deg * kPi / 180.0};
}

Eigen::Vector3d unit_vector(const Direction& dir) {
  const double st = std::sin(dir.theta);
  return {st * std::cos(dir.phi), st * std::sin(dir.phi), std::cos(dir.theta)};
}

Direction direction_from_vector(const Eigen::Vector3d& v) {
  const double r = v.norm();
  if (r == 0.0)
    throw DomainError("zero vector has no direction");
  double phi = std::atan2(v.y(), v.x());
  if (phi < 0.0)
    phi += 2.0 * kPi;
  return {std::acos(std::clamp(v.z() / r, -1.0, 1.0)), phi};
}

double angle_between(const Direction& a, const Direction& b) {
  // atan2 keeps full precision near 0 and pi, where acos(dot) does not.
  const Eigen::Vector3d ua = unit_vector(a);
  const Eigen::Vector3d ub = unit_vector(b);
  return std::atan2(ua.cross(ub).norm(), std::clamp(ua.dot(ub), -1.0, 1.0));
}

Direction antipode(const Direction& dir) {
  double phi = std::fmod(dir.phi + kPi, 2.0 * kPi);
  if (phi < 0.0)
    phi += 2.0 * kPi;
  return {kPi - dir.theta, phi};
}

double Acoustics::wavenumber() const { return 2.0 * kPi * frequency_hz / sound_speed; }
double Acoustics::wavelength() const { return sound_speed / frequency_hz; }

ArrayModel ArrayModel::linear(int sensors, double spacing, double frequency_hz,
                              double sound_speed) {
  if (sensors < 1)
    throw DomainError("linear array needs at least one sensor");
  if (!(spacing > 0.0))
    throw DomainError("linear array spacing must be positive");
  check_physics(frequency_hz, sound_speed);
  return ArrayModel(LinearGeometry{sensors, spacing}, Acoustics{frequency_hz, sound_speed});
}

ArrayModel ArrayModel::open(std::vector<Eigen::Vector3d> positions, double frequency_hz,
                            double sound_speed) {
  if (positions.empty())
    throw DomainError("open array needs at least one position");
  for (const auto& p : positions)
    if (!p.allFinite())
      throw DomainError("open array position is not finite");
  check_physics(frequency_hz, sound_speed);
  return ArrayModel(OpenGeometry{std::move(positions)}, Acoustics{frequency_hz, sound_speed});
}

ArrayModel ArrayModel::spherical(int order, double radius, double frequency_hz,
                                 double sound_speed) {
  if (order < 0)
    throw DomainError("spherical array order must be >= 0");
  if (!(radius > 0.0))
    throw DomainError("sphere radius must be positive");
  check_physics(frequency_hz, sound_speed);
  return ArrayModel(SphericalGeometry{order, radius}, Acoustics{frequency_hz, sound_speed});
}

ArrayModel ArrayModel::spherical_kr(int order, double kr, double sound_speed) {
  if (!(kr > 0.0))
    throw DomainError("kr must be positive");
  return spherical(order, 1.0, kr * sound_speed / (2.0 * kPi), sound_speed);
}

ArrayKind ArrayModel::kind() const {
  return static_cast<ArrayKind>(geometry_.index());
}

const LinearGeometry& ArrayModel::linear_geometry() const {
  if (const auto* g = std::get_if<LinearGeometry>(&geometry_))
    return *g;
  throw InputError("array model is not linear");
}

const OpenGeometry& ArrayModel::open_geometry() const {
  if (const auto* g = std::get_if<OpenGeometry>(&geometry_))
    return *g;
  throw InputError("array model is not an open array");
}

const SphericalGeometry& ArrayModel::spherical_geometry() const {
  if (const auto* g = std::get_if<SphericalGeometry>(&geometry_))
    return *g;
  throw InputError("array model is not spherical");
}

int ArrayModel::manifold_size() const {
  switch (kind()) {
  case ArrayKind::linear:
    return linear_geometry().sensors;
  case ArrayKind::open:
    return static_cast<int>(open_geometry().positions.size());
  case ArrayKind::spherical:
    return spherical_geometry().order + 1;
  }
  return 0;
}

double ArrayModel::kr() const {
  return acoustics_.wavenumber() * spherical_geometry().radius;
}

Eigen::VectorXcd open_manifold(const OpenGeometry& geometry, const Eigen::Vector3d& wavevector) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(geometry.positions.size()));
  for (std::size_t q = 0; q < geometry.positions.size(); ++q)
    v[static_cast<Eigen::Index>(q)] = std::polar(1.0, -wavevector.dot(geometry.positions[q]));
  return v;
}

Eigen::VectorXcd phase_mode_manifold(const std::vector<cplx>& mode_strengths, double Theta) {
  check_theta(Theta);
  const int order = static_cast<int>(mode_strengths.size()) - 1;
  const auto p = specfun::legendre_p_all(order, std::cos(Theta));
  Eigen::VectorXcd v(order + 1);
  for (int n = 0; n <= order; ++n)
    v[n] = mode_strengths[n] * ((2.0 * n + 1.0) / (4.0 * kPi) * p[n]);
  return v;
}

Eigen::VectorXcd manifold(const ArrayModel& model, const Direction& dir) {
  switch (model.kind()) {
  case ArrayKind::linear: {
    check_theta(dir.theta);
    const auto& g = model.linear_geometry();
    const double psi = model.acoustics().wavenumber() * g.spacing * std::cos(dir.theta);
    Eigen::VectorXcd v(g.sensors);
    for (int q = 0; q < g.sensors; ++q)
      v[q] = std::polar(1.0, psi * q);
    return v;
  }
  case ArrayKind::open: {
    check_direction(dir);
    const Eigen::Vector3d k0 = -model.acoustics().wavenumber() * unit_vector(dir);
    return open_manifold(model.open_geometry(), k0);
  }
  case ArrayKind::spherical: {
    const auto spec =
        specfun::mode_strength_spectrum(model.spherical_geometry().order, model.kr());
    return phase_mode_manifold(spec.values, dir.theta);
  }
  }
  throw InputError("unknown array kind");
}

std::string to_string(Domain d) { return d == Domain::spatial ? "spatial" : "phase_mode"; }
std::string to_string(ValueClass v) { return v == ValueClass::real ? "real" : "complex"; }

WeightVector WeightVector::make_real(const Eigen::VectorXd& w, Domain domain, Direction look) {
  return {w.cast<cplx>(), domain, ValueClass::real, look};
}

WeightVector WeightVector::make_complex(Eigen::VectorXcd w, Domain domain, Direction look) {
  return {std::move(w), domain, ValueClass::complex, look};
}

int SamplingLayout::max_order() const {
  int n = 0;
  while ((n + 2) * (n + 2) <= size())
    ++n;
  return size() >= 1 ? n : -1;
}

SamplingLayout fibonacci_layout(int points) {
  if (points < 1)
    throw DomainError("layout needs at least one point");
  SamplingLayout layout;
  layout.points.reserve(points);
  const double golden = kPi * (1.0 + std::sqrt(5.0));
  for (int i = 0; i < points; ++i) {
    const double t = (i + 0.5) / points;
    double phi = std::fmod(golden * (i + 0.5), 2.0 * kPi);
    layout.points.push_back({std::acos(1.0 - 2.0 * t), phi});
  }
  layout.alpha.assign(points, 4.0 * kPi / points);
  return layout;
}

SamplingLayout gauss_layout(int order) {
  if (order < 0)
    throw DomainError("order must be >= 0");
  const auto rule = specfun::gauss_legendre(order + 1);
  const int n_phi = 2 * order + 2;
  SamplingLayout layout;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    for (int k = 0; k < n_phi; ++k) {
      layout.points.push_back({std::acos(rule.nodes[i]), 2.0 * kPi * k / n_phi});
      layout.alpha.push_back(rule.weights[i] * 2.0 * kPi / n_phi);
    }
  }
  return layout;
}

SamplingLayout layout_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("layout is not valid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw InputError("layout must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (key != "M" && key != "points" && key != "alpha")
      throw InputError("unknown layout field '" + key + "'");
  if (!j.contains("M") || !j.contains("points") || !j.contains("alpha"))
    throw InputError("layout needs fields M, points and alpha");
  if (!j["M"].is_number_integer())
    throw InputError("layout M must be an integer");
  const int m = j["M"].get<int>();
  const auto& pts = j["points"];
  const auto& alpha = j["alpha"];
  if (!pts.is_array() || !alpha.is_array())
    throw InputError("layout points and alpha must be arrays");
  if (m < 1 || pts.size() != static_cast<std::size_t>(m) || alpha.size() != pts.size())
    throw InputError("layout M does not match the number of points / alpha entries");

  SamplingLayout layout;
  for (const auto& p : pts) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw InputError("layout point must be [theta, phi]");
    Direction d{p[0].get<double>(), p[1].get<double>()};
    if (!(d.theta >= 0.0 && d.theta <= kPi) || !std::isfinite(d.phi))
      throw InputError("layout point outside theta in [0, pi]");
    layout.points.push_back(d);
  }
  for (const auto& a : alpha) {
    if (!a.is_number() || !(a.get<double>() > 0.0))
      throw InputError("layout alpha entries must be positive numbers");
    layout.alpha.push_back(a.get<double>());
  }
  return layout;
}

std::string layout_to_json_text(const SamplingLayout& layout) {
  nlohmann::json j;
  j["M"] = layout.size();
  j["points"] = nlohmann::json::array();
  for (const auto& p : layout.points)
    j["points"].push_back({p.theta, p.phi});
  j["alpha"] = layout.alpha;
  return j.dump(2) + "\n";
}

SamplingLayout load_layout(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw InputError("cannot open layout file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return layout_from_json_text(ss.str());
}

void save_layout(const SamplingLayout& layout, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InputError("cannot write layout file " + path.string());
  out << layout_to_json_text(layout);
}

cplx SteeredSpatialWeights::output(const Eigen::VectorXcd& pressures) const {
  if (pressures.size() != values.size())
    throw InputError("pressure vector length does not match the layout");
  cplx acc{0.0, 0.0};
  for (Eigen::Index i = 0; i < values.size(); ++i)
    acc += alpha[static_cast<std::size_t>(i)] * values[i] * pressures[i];
  return acc;
}

SteeredSpatialWeights steer(const WeightVector& phase_mode_weights, const Direction& look,
                            const SamplingLayout& layout, bool allow_undersampled) {
  if (phase_mode_weights.domain != Domain::phase_mode)
    throw InputError("steer() expects phase-mode weights");
  check_direction(look);
  const int order = static_cast<int>(phase_mode_weights.size()) - 1;
  if (order < 0)
    throw InputError("empty phase-mode weight vector");
  SteeredSpatialWeights out;
  out.undersampled = layout.size() < (order + 1) * (order + 1);
  if (out.undersampled && !allow_undersampled)
    throw InputError("layout with " + std::to_string(layout.size()) +
                     " points is too small for order " + std::to_string(order));
  out.value_class = phase_mode_weights.value_class;
  out.alpha = layout.alpha;
  out.look = look;
  out.values.resize(layout.size());

  const auto& d = phase_mode_weights.values;
  for (int i = 0; i < layout.size(); ++i) {
    const double cos_theta = std::cos(angle_between(layout.points[i], look));
    const auto p = specfun::legendre_p_all(order, cos_theta);
    if (out.value_class == ValueClass::real) {
      double acc = 0.0;
      for (int n = 0; n <= order; ++n)
        acc += d[n].real() * (2.0 * n + 1.0) / (4.0 * kPi) * p[n];
      out.values[i] = {acc, 0.0};
    } else {
      cplx acc{0.0, 0.0};
      for (int n = 0; n <= order; ++n)
        acc += d[n] * ((2.0 * n + 1.0) / (4.0 * kPi) * p[n]);
      out.values[i] = acc;
    }
  }
  return out;
}

} // namespace realbf
