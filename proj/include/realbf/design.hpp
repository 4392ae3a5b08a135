#pragma once

// Fixed beamformer design: maximum directivity (complex or real weights),
// real weights under a white-noise sensitivity cap, and minimum sensitivity.
//
// Weights w act on the manifold as B(Omega) = w^T v(Omega); every designer
// enforces the distortionless constraint |w^T b| = 1 for the look vector b.
// Output power over the sphere is w^T C w^*, sensitivity is w^H S w with S
// the identity for spatial weights and U for phase-mode weights.

#include "realbf/cmatrix.hpp"
#include "realbf/geometry.hpp"

#include <Eigen/Dense>

#include <string>

namespace realbf {

struct DesignProblem {
  /// C of the optimisation (may use a non-physical cost function).
  Eigen::MatrixXcd cost_matrix;
  /// Physical (sin-cost) C used to report the directivity.
  Eigen::MatrixXcd directivity_matrix;
  /// Sensitivity metric S, symmetric positive definite.
  Eigen::MatrixXd metric;
  /// Look-direction manifold b.
  Eigen::VectorXcd look_vector;
  Domain domain = Domain::spatial;
  Direction look;
  CostFunction cost;
};

/// Builds C, the sin-cost C, S and b for a model. For spherical models the
/// look vector is v(Theta = 0) and S = U with `mics` microphones
/// (default (N+1)^2).
DesignProblem make_problem(const ArrayModel& model, const Direction& look,
                           const CostFunction& cost = CostFunction::sin(), int mics = 0);

/// Problem from explicit matrices. An empty metric means the identity; an
/// empty directivity matrix means the cost matrix.
DesignProblem make_problem(Eigen::MatrixXcd c, Eigen::VectorXcd b,
                           Eigen::MatrixXd metric = {}, Eigen::MatrixXcd directivity = {},
                           Domain domain = Domain::spatial);

struct SensitivityBounds {
  double complex_bound = 0.0; // T_min^c = 1 / (b^H S^-1 b)
  double real_bound = 0.0;    // T_min^r = 1 / gamma_max
  double gamma_max = 0.0;     // largest eigenvalue of Re{b' b'^H}, b' = L^-1 b
  double mu = 0.0;            // non-zero eigenvalue of b' b'^H, equal to b'^H b'
};

struct DesignResult {
  WeightVector weights;
  std::string method;
  double phase_phi = 0.0; // real designs: w^T b = e^{j phi}
  double beta = 0.0;      // diagonal loading of the bounded design
  double directivity = 0.0;
  double directivity_index_db = 0.0;
  double sensitivity = 0.0;
  double sensitivity_db = 0.0;
  double bound_complex = 0.0;
  double bound_real = 0.0;
  /// Condition number of the factorised matrix after symmetric diagonal
  /// equilibration.
  double condition_number = 1.0;
  double lagrange_lambda = 0.0;
};

/// Largest equilibrated condition number accepted before a solve.
inline constexpr double kMaxConditionNumber = 1e12;

SensitivityBounds sensitivity_bounds(const Eigen::VectorXcd& b, const Eigen::MatrixXd& metric = {});

/// w = (C^-1 b / b^H C^-1 b)^*.
DesignResult max_directivity_complex(const DesignProblem& problem);

/// phi = angle(b^T C~^-1 b) / 2, c = Re{b e^{-j phi}}, w = C~^-1 c / (c^T C~^-1 c),
/// C~ = Re{C}. phi lies in (-pi/2, pi/2] so Re{w^T b} >= 0.
DesignResult max_directivity_real(const DesignProblem& problem);

/// Real maximum directivity subject to w^T S w <= t0, solved as the real
/// design on C~ + beta S with beta found by bisection. Throws
/// InfeasibleError when t0 is below the real sensitivity bound.
DesignResult bounded_sensitivity_real(const DesignProblem& problem, double t0);

/// w = (S^-1 b)^* / (b^H S^-1 b).
DesignResult min_sensitivity_complex(const DesignProblem& problem);

/// Real weights attaining T_min^r.
DesignResult min_sensitivity_real(const DesignProblem& problem);

} // namespace realbf
