#include "realbf/cmatrix.hpp"

#include "realbf/errors.hpp"
#include "realbf/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace realbf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kConvergenceTol = 1e-9;

double sinc(double x) {
  if (x == 0.0)
    return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

// Gauss-Legendre nodes over [0, pi] with one panel per interval between
// consecutive breakpoints, `order` nodes per panel.
specfun::QuadratureRule theta_rule(const CostFunction& cost, int order) {
  std::vector<double> edges{0.0};
  for (double b : cost.breakpoints())
    edges.push_back(b);
  edges.push_back(kPi);
  specfun::QuadratureRule rule;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const auto panel = specfun::gauss_legendre(order, edges[k], edges[k + 1]);
    rule.nodes.insert(rule.nodes.end(), panel.nodes.begin(), panel.nodes.end());
    rule.weights.insert(rule.weights.end(), panel.weights.begin(), panel.weights.end());
  }
  return rule;
}

// Removes rounding asymmetry; the diagonal of v v^H is real by construction.
Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& c) {
  Eigen::MatrixXcd h = 0.5 * (c + c.adjoint());
  h.diagonal() = h.diagonal().real().cast<cplx>();
  return h;
}

void check_converged(const Eigen::MatrixXcd& coarse, const Eigen::MatrixXcd& fine,
                     const char* what) {
  const double scale = std::max(fine.cwiseAbs().maxCoeff(), 1e-300);
  const double change = (coarse - fine).cwiseAbs().maxCoeff();
  if (change > kConvergenceTol * scale)
    throw ConvergenceError(std::string(what) +
                           ": quadrature order too low (relative change on doubling " +
                           std::to_string(change / scale) + ")");
}

Eigen::MatrixXcd spherical_quadrature(const std::vector<cplx>& b, const CostFunction& cost,
                                      int order) {
  const auto rule = theta_rule(cost, order);
  const Eigen::Index size = static_cast<Eigen::Index>(b.size());
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(size, size);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = rule.nodes[i];
    const Eigen::VectorXcd v = phase_mode_manifold(b, t);
    c.noalias() += (rule.weights[i] * cost(t)) * v * v.adjoint();
  }
  return hermitian_part(c / cost.mass());
}

Eigen::MatrixXcd sphere_quadrature(const ArrayModel& model, const CostFunction& cost, int order,
                                   int phi_points) {
  const auto rule = theta_rule(cost, order);
  const Eigen::Index size = model.manifold_size();
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(size, size);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = rule.nodes[i];
    const double w = rule.weights[i] * cost(t) * (2.0 * kPi / phi_points);
    for (int k = 0; k < phi_points; ++k) {
      const Eigen::VectorXcd v = manifold(model, {t, 2.0 * kPi * k / phi_points});
      c.noalias() += w * v * v.adjoint();
    }
  }
  // (2 / mass) (1 / 4pi)
  return hermitian_part(c / (2.0 * kPi * cost.mass()));
}

} // namespace

CostFunction CostFunction::step(double theta0, double floor) {
  if (!(theta0 > 0.0 && theta0 < kPi))
    throw DomainError("step cost theta0 must lie in (0, pi)");
  if (!(floor > 0.0))
    throw DomainError("step cost floor must be positive");
  CostFunction c;
  c.kind = Kind::step;
  c.step_theta0 = theta0;
  c.step_floor = floor;
  return c;
}

CostFunction CostFunction::custom(std::vector<double> samples) {
  if (samples.size() < 2)
    throw DomainError("custom cost needs at least two samples");
  double total = 0.0;
  for (double s : samples) {
    if (!(s >= 0.0) || !std::isfinite(s))
      throw DomainError("custom cost samples must be finite and nonnegative");
    total += s;
  }
  if (total == 0.0)
    throw DomainError("custom cost is identically zero");
  CostFunction c;
  c.kind = Kind::custom;
  c.samples = std::move(samples);
  return c;
}

CostFunction CostFunction::parse(std::string_view name, double theta0, double floor) {
  if (name == "sin")
    return sin();
  if (name == "linear")
    return linear();
  if (name == "uniform")
    return uniform();
  if (name == "step")
    return step(theta0, floor);
  throw InputError("unknown cost function '" + std::string(name) + "'");
}

double CostFunction::operator()(double Theta) const {
  switch (kind) {
  case Kind::sin:
    return std::sin(Theta);
  case Kind::linear:
    return Theta / kPi;
  case Kind::uniform:
    return 1.0;
  case Kind::step:
    return Theta < step_theta0 ? step_floor : 1.0;
  case Kind::custom: {
    const double pos = std::clamp(Theta / kPi, 0.0, 1.0) * (samples.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(pos), samples.size() - 2);
    const double frac = pos - static_cast<double>(i);
    return samples[i] * (1.0 - frac) + samples[i + 1] * frac;
  }
  }
  return 0.0;
}

double CostFunction::mass() const {
  switch (kind) {
  case Kind::sin:
    return 2.0;
  case Kind::linear:
    return kPi / 2.0;
  case Kind::uniform:
    return kPi;
  case Kind::step:
    return step_floor * step_theta0 + (kPi - step_theta0);
  case Kind::custom: {
    const double h = kPi / static_cast<double>(samples.size() - 1);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i)
      acc += 0.5 * h * (samples[i] + samples[i + 1]);
    return acc;
  }
  }
  return 0.0;
}

std::vector<double> CostFunction::breakpoints() const {
  if (kind == Kind::step)
    return {step_theta0};
  if (kind == Kind::custom) {
    std::vector<double> out;
    for (std::size_t i = 1; i + 1 < samples.size(); ++i)
      out.push_back(kPi * static_cast<double>(i) / static_cast<double>(samples.size() - 1));
    return out;
  }
  return {};
}

std::string CostFunction::name() const {
  switch (kind) {
  case Kind::sin:
    return "sin";
  case Kind::linear:
    return "linear";
  case Kind::uniform:
    return "uniform";
  case Kind::step:
    return "step";
  case Kind::custom:
    return "custom";
  }
  return "?";
}

CMatrix c_linear(int sensors, double spacing, double wavelength) {
  if (sensors < 1 || !(spacing > 0.0) || !(wavelength > 0.0))
    throw DomainError("c_linear needs M >= 1, d > 0 and lambda > 0");
  CMatrix c;
  c.cost = CostFunction::sin();
  c.closed_form = true;
  c.entries.resize(sensors, sensors);
  for (int n = 0; n < sensors; ++n)
    for (int m = 0; m < sensors; ++m)
      c.entries(n, m) = sinc(2.0 * spacing * (n - m) / wavelength);
  return c;
}

CMatrix c_spherical(int order, double kr, const CostFunction& cost, int quadrature_order,
                    bool force_quadrature) {
  if (order < 0)
    throw DomainError("order must be >= 0");
  const auto b = specfun::mode_strength_spectrum(order, kr).values;
  CMatrix c;
  c.cost = cost;
  if (cost.kind == CostFunction::Kind::sin && !force_quadrature) {
    c.closed_form = true;
    c.entries = Eigen::MatrixXcd::Zero(order + 1, order + 1);
    for (int n = 0; n <= order; ++n)
      c.entries(n, n) = (2.0 * n + 1.0) * std::norm(b[n]) / (16.0 * kPi * kPi);
    return c;
  }
  const int q = quadrature_order > 0 ? quadrature_order : 8 * (order + 1);
  c.quadrature_order = q;
  c.entries = spherical_quadrature(b, cost, q);
  check_converged(c.entries, spherical_quadrature(b, cost, 2 * q), "c_spherical");
  return c;
}

CMatrix c_numeric(const ArrayModel& model, const CostFunction& cost, int quadrature_order) {
  if (model.kind() == ArrayKind::spherical)
    return c_spherical(model.spherical_geometry().order, model.kr(), cost, quadrature_order,
                       /*force_quadrature=*/true);

  // Electrical size sets the number of oscillations of the integrand.
  double extent = 0.0;
  int phi_points = 1;
  if (model.kind() == ArrayKind::linear) {
    const auto& g = model.linear_geometry();
    extent = 0.5 * g.spacing * (g.sensors - 1);
  } else {
    const auto& pos = model.open_geometry().positions;
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto& p : pos)
      centroid += p;
    centroid /= static_cast<double>(pos.size());
    for (const auto& p : pos)
      extent = std::max(extent, (p - centroid).norm());
  }
  const double electrical = model.acoustics().wavenumber() * extent;
  const int q = quadrature_order > 0 ? quadrature_order
                                     : 32 + static_cast<int>(std::ceil(2.0 * electrical));
  if (model.kind() == ArrayKind::open)
    phi_points = 2 * q;

  CMatrix c;
  c.cost = cost;
  c.quadrature_order = q;
  c.entries = sphere_quadrature(model, cost, q, phi_points);
  const int fine_phi = model.kind() == ArrayKind::open ? 2 * phi_points : 1;
  check_converged(c.entries, sphere_quadrature(model, cost, 2 * q, fine_phi), "c_numeric");
  return c;
}

UMatrix u_matrix(int order, int mics) {
  if (order < 0 || mics < 1)
    throw DomainError("u_matrix needs N >= 0 and M >= 1");
  UMatrix u;
  u.mics = mics;
  u.diagonal.resize(order + 1);
  for (int n = 0; n <= order; ++n)
    u.diagonal[n] = (2.0 * n + 1.0) / mics;
  return u;
}

} // namespace realbf
