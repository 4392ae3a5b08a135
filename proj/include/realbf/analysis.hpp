#pragma once

// Performance measures, beampatterns and lobe bookkeeping.

#include "realbf/geometry.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <vector>

namespace realbf {

/// Directivity D = |w^T b|^2 / (w^T C w^*), with C the sin-cost matrix.
double directivity(const Eigen::VectorXcd& w, const Eigen::VectorXcd& b,
                   const Eigen::MatrixXcd& c_sin);
/// Sensitivity w^H S w (S = I for spatial weights, U for phase-mode weights).
double sensitivity(const Eigen::VectorXcd& w, const Eigen::MatrixXd& metric);
double to_db10(double power_ratio);

/// Floor applied to 20 log10 |B| normalised patterns.
inline constexpr double kDbFloor = -200.0;

struct GridSpec {
  double step_deg = 0.05;      // 1-D theta grid (linear / spherical)
  double phi_step_deg = 2.0;   // 2-D grids (open arrays)
  double theta_step_deg = 2.0; // 2-D grids (open arrays)
};

struct BeampatternGrid {
  /// 1-D: theta only (phi = 0), ascending. 2-D: theta-major product grid.
  std::vector<Direction> angles;
  int theta_count = 0;
  int phi_count = 1;
  Eigen::VectorXcd response;
  std::vector<double> magnitude_db; // 20 log10 |B / B(look)|
  cplx look_response{0, 0};

  bool two_dimensional() const { return phi_count > 1; }
};

/// B = w^T v over the grid, normalised to the look direction. Linear and
/// spherical models give a 1-D grid over [0, pi] that includes the look angle
/// and its mirror (pi - theta_l); for phase-mode weights the angle is Theta,
/// measured from the look direction. Open arrays give a 2-D grid.
BeampatternGrid beampattern(const WeightVector& w, const ArrayModel& model,
                            const GridSpec& spec = {});

struct Lobe {
  double angle = 0.0; // radians
  double level_db = 0.0;
};

struct LobeReport {
  double mainlobe_left = 0.0;
  double mainlobe_right = 0.0;
  double mainlobe_width = 0.0; // null to null
  double sidelobe_level_db = kDbFloor;
  double sidelobe_angle = 0.0;
  /// Strongest lobe outside the mainlobe within 0.5 dB of the look level.
  std::optional<Lobe> parasitic_lobe;
  /// Peaks of every lobe outside the mainlobe, by angle.
  std::vector<Lobe> lobes;
};

/// Lobe structure of a 1-D pattern around look angle `look_theta`. The
/// mainlobe ends at the first local minimum on each side; parasitic lobes are
/// excluded from the sidelobe level. Throws InputError for 2-D grids and for
/// grids coarser than 0.1 degree.
LobeReport lobe_analysis(const BeampatternGrid& grid, double look_theta);

/// Directivity 4 pi |B(look)|^2 / Int |B|^2 dOmega by direct quadrature of
/// the pattern (Gauss-Legendre in theta, trapezoid in phi).
double directivity_by_quadrature(const WeightVector& w, const ArrayModel& model,
                                 const Direction& look, int theta_nodes = 0);

/// CSV writers. 1-D: angle_deg,re,im,mag_db. 2-D: theta_deg,phi_deg,mag_db.
void write_pattern_csv(const BeampatternGrid& grid, const std::filesystem::path& path);
void write_map_csv(const std::vector<Direction>& angles, const std::vector<double>& values_db,
                   const std::filesystem::path& path);

} // namespace realbf
