#pragma once

// Quadratic-form matrices of the directivity problem.
//
// C generalises the sphere-averaged output power: the sin(theta) Jacobian of
// the surface integral is replaced by a cost rho(Theta), normalised to unit
// mass so that rho = sin reproduces the physical directivity denominator:
//
//   C = (2 / mass(rho)) (1/4pi) Int Int v(Omega) v(Omega)^H rho(theta) dphi dtheta,
//   mass(rho) = Int_0^pi rho(Theta) dTheta.
//
// For phase-mode manifolds the azimuthal integral is done analytically,
// C = (1 / mass) Int_0^pi v(Theta) v(Theta)^H rho(Theta) dTheta.

#include "realbf/geometry.hpp"

#include <Eigen/Dense>

#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace realbf {

/// Angular weighting inside the C-matrix integral. Theta is the polar angle
/// (for phase-mode arrays, the angle from the look direction).
struct CostFunction {
  enum class Kind { sin, linear, uniform, step, custom };

  static constexpr double kDefaultStepTheta0 = std::numbers::pi / 10.0;
  static constexpr double kDefaultStepFloor = 1e-3;

  Kind kind = Kind::sin;
  double step_theta0 = kDefaultStepTheta0;
  double step_floor = kDefaultStepFloor;
  /// Custom cost: samples equally spaced over [0, pi], linearly interpolated.
  std::vector<double> samples;

  static CostFunction sin() { return of(Kind::sin); }
  static CostFunction linear() { return of(Kind::linear); }
  static CostFunction uniform() { return of(Kind::uniform); }
  static CostFunction step(double theta0 = kDefaultStepTheta0, double floor = kDefaultStepFloor);
  static CostFunction custom(std::vector<double> samples);
  /// "sin" | "linear" | "uniform" | "step"
  static CostFunction parse(std::string_view name, double theta0 = kDefaultStepTheta0,
                            double floor = kDefaultStepFloor);

  double operator()(double Theta) const;
  /// Int_0^pi rho(Theta) dTheta.
  double mass() const;
  /// Interior points where rho has a jump or a kink.
  std::vector<double> breakpoints() const;
  std::string name() const;

private:
  static CostFunction of(Kind k) {
    CostFunction c;
    c.kind = k;
    return c;
  }
};

struct CMatrix {
  Eigen::MatrixXcd entries;
  CostFunction cost;
  bool closed_form = false;
  int quadrature_order = 0; // nodes per panel; 0 for closed forms

  Eigen::Index size() const { return entries.rows(); }
  Eigen::MatrixXd real_part() const { return entries.real(); }
};

/// Sphere-averaged C for a uniform linear array,
/// [C]_nm = sinc(2 d (n-m) / lambda), sinc(x) = sin(pi x) / (pi x).
CMatrix c_linear(int sensors, double spacing, double wavelength);

/// Phase-mode C for a rigid sphere. The sin cost has the closed form
/// (1/4pi)^2 diag(|b_0|^2, 3|b_1|^2, ..., (2N+1)|b_N|^2); other costs (or
/// force_quadrature) use Gauss-Legendre panels split at the cost breakpoints,
/// 8(N+1) nodes per panel unless quadrature_order > 0. Throws
/// ConvergenceError if doubling the order moves any entry by more than
/// 1e-9 relative to the largest entry.
CMatrix c_spherical(int order, double kr, const CostFunction& cost, int quadrature_order = 0,
                    bool force_quadrature = false);

/// Numerical C for any array model: Gauss-Legendre in theta times the
/// trapezoid rule in phi. Spherical models are forwarded to c_spherical().
CMatrix c_numeric(const ArrayModel& model, const CostFunction& cost, int quadrature_order = 0);

/// Phase-mode sensitivity matrix U = diag(1, 3, ..., 2N+1) / M.
struct UMatrix {
  Eigen::VectorXd diagonal;
  int mics = 1;

  Eigen::MatrixXd matrix() const { return diagonal.asDiagonal(); }
};

UMatrix u_matrix(int order, int mics);

} // namespace realbf
