#pragma once

// Plane-wave decomposition with a rigid spherical array on synthetic data:
// pressure synthesis, least-squares spherical Fourier transform and
// direction maps for given phase-mode weights.

#include "realbf/geometry.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace realbf {

struct PressureSnapshot {
  double kr = 0.0;
  Eigen::VectorXcd pressures; // one entry per layout point
  Direction true_source;
  int synthesis_order = 0;
};

struct NoiseSpec {
  double snr_db = 0.0;
  std::uint64_t seed = 0;
};

/// p(Omega_i) = sum_{n <= n_sim} sum_m b_n(kr) conj(Y_n^m(Omega_0)) Y_n^m(Omega_i),
/// optionally plus complex white Gaussian noise at the given SNR (relative to
/// the mean pressure power).
PressureSnapshot simulate_pressure(const Direction& source, double kr,
                                   const SamplingLayout& layout, int synthesis_order,
                                   std::optional<NoiseSpec> noise = std::nullopt);

/// Default synthesis order ceil(kr) + 4.
int default_synthesis_order(double kr);

struct SftResult {
  Eigen::VectorXcd coefficients; // p_nm packed by specfun::sh_index
  int order = 0;
  double condition_number = 1.0;
  double residual = 0.0; // |Y p_nm - p| / |p|
  bool ill_conditioned = false;
};

/// Condition number of the transform matrix above which a warning is raised,
/// and above which the transform fails.
inline constexpr double kSftWarnCondition = 1e6;
inline constexpr double kSftMaxCondition = 1e12;

/// Least-squares p_nm for n <= order via the SVD pseudo-inverse.
SftResult sft_pinv(const PressureSnapshot& snapshot, const SamplingLayout& layout, int order);

struct PwdPeak {
  Direction direction;
  double relative_db = 0.0;
};

struct PwdMap {
  /// theta-major product grid, theta in [0, 180] deg, phi in [0, 360) deg
  std::vector<Direction> angles;
  int theta_count = 0;
  int phi_count = 0;
  std::vector<cplx> field;       // y, unnormalised
  std::vector<double> intensity; // |y|^2 / max |y|^2
  PwdPeak peak;
  std::optional<PwdPeak> secondary_peak;

  std::vector<double> intensity_db() const;
};

/// y(Omega_l) = sum_nm p_nm d_n Y_n^m(Omega_l) on a grid with the given
/// step in degrees; intensity normalised to its maximum.
PwdMap pwd_map(const Eigen::VectorXcd& coefficients, const Eigen::VectorXcd& phase_mode_weights,
               double step_deg = 2.0);

struct Scenario {
  Direction source;
  double frequency_hz = 2400.0;
  double radius_m = 0.09;
  int order = 4;
  std::filesystem::path layout_path;
  std::optional<double> noise_snr_db;
  double sound_speed = 343.0;

  double kr() const;
};

/// Strict JSON: {"source": [theta_deg, phi_deg], "f_hz", "r_m", "N",
/// "layout_path", "noise_snr_db"?}. Relative layout paths are resolved
/// against `base_dir`.
Scenario scenario_from_json_text(const std::string& text, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

} // namespace realbf
