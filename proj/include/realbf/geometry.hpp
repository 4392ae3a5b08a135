#pragma once

// Array models, manifold vectors, sampling layouts and phase-mode steering.
//
// Linear arrays follow the classic endfire convention: sensors at q*d along
// the z axis (origin at the first sensor), theta measured from the array
// axis, entries e^{j psi q} with psi = (2 pi d / lambda) cos(theta).
//
// Open arrays: for arrival direction Omega the propagation wavevector is
// k0 = -k u(Omega) and the sensor response is e^{-j k0^T r_q}. A linear array
// is exactly an open array with positions q d z-hat.
//
// Spherical (rigid, phase-mode) arrays: the manifold is indexed by order n and
// depends only on the angle Theta from the look direction,
//   v_n(Theta) = b_n(kr) (2n+1)/(4 pi) P_n(cos Theta).

#include <Eigen/Dense>

#include <complex>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace realbf {

using cplx = std::complex<double>;

/// Spherical angles in radians: theta in [0, pi] (polar), phi in [0, 2 pi).
struct Direction {
  double theta = 0.0;
  double phi = 0.0;
};

Direction direction_from_degrees(double theta_deg, double phi_deg);
Eigen::Vector3d unit_vector(const Direction& dir);
Direction direction_from_vector(const Eigen::Vector3d& v);

/// Angle between two directions in [0, pi].
double angle_between(const Direction& a, const Direction& b);

/// Antipodal direction (pi - theta, phi + pi).
Direction antipode(const Direction& dir);

/// Wave physics shared by all geometries.
struct Acoustics {
  double frequency_hz = 1000.0;
  double sound_speed = 343.0;

  double wavenumber() const;
  double wavelength() const;
};

struct LinearGeometry {
  int sensors = 1;
  double spacing = 0.1; // metres
};

struct OpenGeometry {
  std::vector<Eigen::Vector3d> positions; // metres
};

struct SphericalGeometry {
  int order = 0;
  double radius = 0.1; // metres
};

enum class ArrayKind { linear, open, spherical };

/// Immutable geometry + physics bundle. Use the factories, which validate.
class ArrayModel {
public:
  static ArrayModel linear(int sensors, double spacing, double frequency_hz,
                           double sound_speed = 343.0);
  static ArrayModel open(std::vector<Eigen::Vector3d> positions, double frequency_hz,
                         double sound_speed = 343.0);
  static ArrayModel spherical(int order, double radius, double frequency_hz,
                              double sound_speed = 343.0);
  /// Rigid sphere described by kr alone. Uses a unit radius and the
  /// frequency that produces the requested kr.
  static ArrayModel spherical_kr(int order, double kr, double sound_speed = 343.0);

  ArrayKind kind() const;
  const Acoustics& acoustics() const { return acoustics_; }
  const LinearGeometry& linear_geometry() const;
  const OpenGeometry& open_geometry() const;
  const SphericalGeometry& spherical_geometry() const;

  /// Manifold length: M for linear / open, N+1 for spherical.
  int manifold_size() const;
  /// k r for spherical models.
  double kr() const;

private:
  using Geometry = std::variant<LinearGeometry, OpenGeometry, SphericalGeometry>;
  ArrayModel(Geometry g, Acoustics a) : geometry_(std::move(g)), acoustics_(a) {}

  Geometry geometry_;
  Acoustics acoustics_;
};

/// Manifold vector. The meaning of `dir` depends on the model:
///  - linear:    dir.theta is the arrival angle from endfire (phi ignored)
///  - open:      dir is the arrival direction Omega
///  - spherical: dir.theta is Theta, the angle from the look direction
Eigen::VectorXcd manifold(const ArrayModel& model, const Direction& dir);

/// Open-array manifold for an explicit propagation wavevector k0 (rad/m).
Eigen::VectorXcd open_manifold(const OpenGeometry& geometry, const Eigen::Vector3d& wavevector);

/// Phase-mode manifold at angle Theta for given mode strengths b_0..b_N.
Eigen::VectorXcd phase_mode_manifold(const std::vector<cplx>& mode_strengths, double Theta);

enum class Domain { spatial, phase_mode };
enum class ValueClass { real, complex };

std::string to_string(Domain d);
std::string to_string(ValueClass v);

/// Design weights. Real weights are stored with imaginary parts exactly 0.
struct WeightVector {
  Eigen::VectorXcd values;
  Domain domain = Domain::spatial;
  ValueClass value_class = ValueClass::complex;
  Direction look;

  static WeightVector make_real(const Eigen::VectorXd& w, Domain domain, Direction look);
  static WeightVector make_complex(Eigen::VectorXcd w, Domain domain, Direction look);

  Eigen::Index size() const { return values.size(); }
  bool is_real() const { return value_class == ValueClass::real; }
};

/// Microphone positions on a sphere with per-point sampling coefficients
/// alpha_i (4 pi / M for nearly-uniform sets).
struct SamplingLayout {
  std::vector<Direction> points;
  std::vector<double> alpha;

  int size() const { return static_cast<int>(points.size()); }
  /// Largest order N for which size() >= (N+1)^2.
  int max_order() const;
};

/// Nearly-uniform spherical Fibonacci layout with alpha_i = 4 pi / M.
SamplingLayout fibonacci_layout(int points);

/// Gauss-Legendre x equiangular product layout, (N+1) x (2N+2) points, that
/// integrates products of order-N spherical harmonics exactly.
SamplingLayout gauss_layout(int order);

/// JSON {"M": int, "points": [[theta, phi], ...], "alpha": [...]}, radians.
SamplingLayout layout_from_json_text(const std::string& text);
std::string layout_to_json_text(const SamplingLayout& layout);
SamplingLayout load_layout(const std::filesystem::path& path);
void save_layout(const SamplingLayout& layout, const std::filesystem::path& path);

/// Per-microphone weights obtained by steering phase-mode weights d_n to a
/// look direction: w_i = sum_n d_n (2n+1)/(4 pi) P_n(cos Theta_i). The array
/// output for pressures p_i is sum_i alpha_i w_i p_i.
struct SteeredSpatialWeights {
  Eigen::VectorXcd values;
  ValueClass value_class = ValueClass::complex;
  std::vector<double> alpha;
  Direction look;
  /// Set when the layout has fewer than (N+1)^2 points.
  bool undersampled = false;

  cplx output(const Eigen::VectorXcd& pressures) const;
};

SteeredSpatialWeights steer(const WeightVector& phase_mode_weights, const Direction& look,
                            const SamplingLayout& layout, bool allow_undersampled = false);

} // namespace realbf
