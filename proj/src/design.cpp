#include "realbf/design.hpp"

#include "realbf/analysis.hpp"
#include "realbf/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <optional>
#include <type_traits>

namespace realbf {

namespace {

constexpr double kConstraintTol = 1e-9;
constexpr double kDegenerateTol = 1e-14;
constexpr double kBisectionTol = 1e-6;
constexpr int kMaxIterations = 200;

// Cholesky of D^-1/2 A D^-1/2, D = diag(A). Equilibration removes the huge
// spread in mode-strength magnitudes at low kr without changing the solution.
template <class Matrix>
class SpdSolver {
public:

  SpdSolver(const Matrix& a, const char* what) {
    const Eigen::Index n = a.rows();
    scale_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = std::real(a(i, i));
      if (!(d > 0.0) || !std::isfinite(d))
        throw SingularMatrixError(std::string(what) + " has a non-positive diagonal entry");
      scale_[i] = 1.0 / std::sqrt(d);
    }
    const Matrix scaled = scale_.asDiagonal() * a * scale_.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> es(scaled, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    condition_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(condition_ <= kMaxConditionNumber))
      throw SingularMatrixError(std::string(what) + " is singular or ill-conditioned (cond " +
                                std::to_string(condition_) +
                                "); consider the bounded-sensitivity design");
    llt_.compute(scaled);
    if (llt_.info() != Eigen::Success)
      throw SingularMatrixError(std::string(what) + " is not positive definite");
  }

  template <class Rhs>
  auto solve(const Rhs& rhs) const {
    using R = typename Rhs::Scalar;
    const Eigen::Matrix<R, Eigen::Dynamic, 1> s = scale_.cast<R>();
    if constexpr (std::is_same_v<typename Matrix::Scalar, double> && std::is_same_v<R, cplx>) {
      const Eigen::VectorXd re = llt_.solve(scale_.cwiseProduct(rhs.real()));
      const Eigen::VectorXd im = llt_.solve(scale_.cwiseProduct(rhs.imag()));
      Eigen::VectorXcd out(rhs.size());
      out.real() = scale_.cwiseProduct(re);
      out.imag() = scale_.cwiseProduct(im);
      return out;
    } else {
      const Eigen::Matrix<R, Eigen::Dynamic, 1> x = llt_.solve(s.cwiseProduct(rhs));
      return Eigen::Matrix<R, Eigen::Dynamic, 1>(s.cwiseProduct(x));
    }
  }

  double condition() const { return condition_; }

private:
  Eigen::VectorXd scale_;
  Eigen::LLT<Matrix> llt_;
  double condition_ = 1.0;
};

Eigen::MatrixXd metric_or_identity(const Eigen::MatrixXd& metric, Eigen::Index n) {
  if (metric.size() == 0)
    return Eigen::MatrixXd::Identity(n, n);
  if (metric.rows() != n || metric.cols() != n)
    throw DomainError("sensitivity metric size does not match the manifold");
  return metric;
}

void check_problem(const DesignProblem& p) {
  const Eigen::Index n = p.look_vector.size();
  if (n == 0)
    throw DomainError("empty look vector");
  if (p.cost_matrix.rows() != n || p.cost_matrix.cols() != n ||
      p.directivity_matrix.rows() != n || p.metric.rows() != n)
    throw DomainError("design matrices do not match the look vector size");
  if (!p.look_vector.allFinite())
    throw NumericError("look vector has non-finite entries");
}

struct RealSolution {
  Eigen::VectorXd w;
  double phi = 0.0;
  double lambda = 0.0;
  double condition = 1.0;
};

// w = A^-1 c / (c^T A^-1 c), c = Re{b e^{-j phi}}, phi = angle(b^T A^-1 b) / 2.
RealSolution real_solution(const Eigen::MatrixXd& a, const Eigen::VectorXcd& b, const char* what) {
  const SpdSolver<Eigen::MatrixXd> solver(a, what);
  const Eigen::VectorXcd ab = solver.solve(b);
  const cplx q = (b.transpose() * ab).value();
  RealSolution r;
  r.phi = 0.5 * std::arg(q);
  const Eigen::VectorXd c = (b * std::polar(1.0, -r.phi)).real();
  const Eigen::VectorXd x = solver.solve(c);
  const double den = c.dot(x);
  // den >= b^H A^-1 b / 2 for the optimal phi, so only b ~ 0 gets here
  const double ref = std::real(b.dot(ab));
  if (!(den > kDegenerateTol * ref) || !(ref > 0.0))
    throw DegenerateError("degenerate look direction: c^T C^-1 c vanishes");
  r.w = x / den;
  r.lambda = 1.0 / den;
  r.condition = solver.condition();
  return r;
}

SensitivityBounds bounds_for(const DesignProblem& p) {
  return sensitivity_bounds(p.look_vector, p.metric);
}

DesignResult finish(const DesignProblem& p, Eigen::VectorXcd w, bool real, const char* method) {
  DesignResult r;
  r.method = method;
  const cplx gain = (w.transpose() * p.look_vector).value();
  if (std::abs(std::abs(gain) - 1.0) > kConstraintTol)
    throw NumericError(std::string(method) + ": distortionless constraint violated (|w^T b| = " +
                       std::to_string(std::abs(gain)) + ")");
  r.weights = real ? WeightVector::make_real(w.real(), p.domain, p.look)
                   : WeightVector::make_complex(std::move(w), p.domain, p.look);
  r.directivity = directivity(r.weights.values, p.look_vector, p.directivity_matrix);
  r.directivity_index_db = to_db10(r.directivity);
  r.sensitivity = sensitivity(r.weights.values, p.metric) / std::norm(gain);
  r.sensitivity_db = to_db10(r.sensitivity);
  const auto bounds = bounds_for(p);
  r.bound_complex = bounds.complex_bound;
  r.bound_real = bounds.real_bound;
  return r;
}

} // namespace

DesignProblem make_problem(const ArrayModel& model, const Direction& look,
                           const CostFunction& cost, int mics) {
  DesignProblem p;
  p.look = look;
  p.cost = cost;
  const bool sin_cost = cost.kind == CostFunction::Kind::sin;
  switch (model.kind()) {
  case ArrayKind::linear: {
    const auto& g = model.linear_geometry();
    p.look_vector = manifold(model, look);
    p.directivity_matrix = c_linear(g.sensors, g.spacing, model.acoustics().wavelength()).entries;
    p.cost_matrix = sin_cost ? p.directivity_matrix : c_numeric(model, cost).entries;
    p.metric = Eigen::MatrixXd::Identity(g.sensors, g.sensors);
    p.domain = Domain::spatial;
    break;
  }
  case ArrayKind::open: {
    p.look_vector = manifold(model, look);
    p.directivity_matrix = c_numeric(model, CostFunction::sin()).entries;
    p.cost_matrix = sin_cost ? p.directivity_matrix : c_numeric(model, cost).entries;
    p.metric = Eigen::MatrixXd::Identity(model.manifold_size(), model.manifold_size());
    p.domain = Domain::spatial;
    break;
  }
  case ArrayKind::spherical: {
    const int order = model.spherical_geometry().order;
    const double kr = model.kr();
    p.look_vector = manifold(model, {0.0, 0.0});
    p.directivity_matrix = c_spherical(order, kr, CostFunction::sin()).entries;
    p.cost_matrix = sin_cost ? p.directivity_matrix : c_spherical(order, kr, cost).entries;
    p.metric = u_matrix(order, mics > 0 ? mics : (order + 1) * (order + 1)).matrix();
    p.domain = Domain::phase_mode;
    break;
  }
  }
  return p;
}

DesignProblem make_problem(Eigen::MatrixXcd c, Eigen::VectorXcd b, Eigen::MatrixXd metric,
                           Eigen::MatrixXcd directivity, Domain domain) {
  DesignProblem p;
  const Eigen::Index n = b.size();
  p.metric = metric_or_identity(metric, n);
  p.directivity_matrix = directivity.size() == 0 ? c : std::move(directivity);
  p.cost_matrix = std::move(c);
  p.look_vector = std::move(b);
  p.domain = domain;
  check_problem(p);
  return p;
}

SensitivityBounds sensitivity_bounds(const Eigen::VectorXcd& b, const Eigen::MatrixXd& metric) {
  const Eigen::MatrixXd s = metric_or_identity(metric, b.size());
  const Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success)
    throw SingularMatrixError("sensitivity metric is not positive definite");
  // Whitened look vector b' = L^-1 b, so that w^T S w = |L^T w|^2.
  Eigen::VectorXcd bw(b.size());
  bw.real() = llt.matrixL().solve(b.real());
  bw.imag() = llt.matrixL().solve(b.imag());

  SensitivityBounds out;
  out.mu = bw.squaredNorm();
  const Eigen::MatrixXd gram = (bw * bw.adjoint()).real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  out.gamma_max = es.eigenvalues().maxCoeff();
  if (!(out.gamma_max >= kDegenerateTol))
    throw DegenerateError("zero or degenerate look manifold");
  out.complex_bound = 1.0 / out.mu;
  out.real_bound = 1.0 / out.gamma_max;
  return out;
}

DesignResult max_directivity_complex(const DesignProblem& problem) {
  check_problem(problem);
  const SpdSolver<Eigen::MatrixXcd> solver(problem.cost_matrix, "C");
  const Eigen::VectorXcd x = solver.solve(problem.look_vector);
  const double q = std::real(problem.look_vector.dot(x)); // b^H C^-1 b
  if (!(q > 0.0))
    throw DegenerateError("b^H C^-1 b vanishes");
  auto r = finish(problem, x.conjugate() / q, false, "max_directivity_complex");
  r.condition_number = solver.condition();
  r.lagrange_lambda = 1.0 / q;
  return r;
}

DesignResult max_directivity_real(const DesignProblem& problem) {
  check_problem(problem);
  const auto sol = real_solution(problem.cost_matrix.real(), problem.look_vector, "Re{C}");
  auto r = finish(problem, sol.w.cast<cplx>(), true, "max_directivity_real");
  r.phase_phi = sol.phi;
  r.condition_number = sol.condition;
  r.lagrange_lambda = sol.lambda;
  return r;
}

DesignResult bounded_sensitivity_real(const DesignProblem& problem, double t0) {
  check_problem(problem);
  if (!(t0 > 0.0))
    throw InfeasibleError("sensitivity cap must be positive");
  const auto bounds = bounds_for(problem);
  if (t0 < bounds.real_bound * (1.0 - 1e-12))
    throw InfeasibleError("sensitivity cap " + std::to_string(to_db10(t0)) +
                          " dB is below the real-weight bound " +
                          std::to_string(to_db10(bounds.real_bound)) + " dB");

  const Eigen::MatrixXd ct = problem.cost_matrix.real();
  const Eigen::MatrixXd& s = problem.metric;
  const auto solve_at = [&](double beta) {
    return real_solution(ct + beta * s, problem.look_vector, "Re{C + beta S}");
  };
  const auto sens = [&](const RealSolution& sol) { return sol.w.dot(s * sol.w); };

  const auto finish_at = [&](const RealSolution& sol, double beta) {
    auto r = finish(problem, sol.w.cast<cplx>(), true, "bounded_sensitivity_real");
    r.phase_phi = sol.phi;
    r.beta = beta;
    r.condition_number = sol.condition;
    r.lagrange_lambda = sol.lambda;
    return r;
  };

  if (std::isinf(t0))
    return finish_at(solve_at(0.0), 0.0);
  // Unconstrained optimum first; it may be singular, in which case loading
  // is needed regardless of t0.
  std::optional<RealSolution> free;
  try {
    free = solve_at(0.0);
  } catch (const SingularMatrixError&) {
  }
  if (free && sens(*free) <= t0)
    return finish_at(*free, 0.0);

  double lo = 0.0;
  double t_lo = free ? sens(*free) : std::numeric_limits<double>::infinity();
  double hi = 1.0;
  auto sol_hi = solve_at(hi);
  double t_hi = sens(sol_hi);
  for (int i = 0; t_hi > t0 * (1.0 + kBisectionTol); ++i) {
    if (i == kMaxIterations)
      throw ConvergenceError("could not bracket the loading level beta");
    lo = hi;
    t_lo = t_hi;
    hi *= 2.0;
    sol_hi = solve_at(hi);
    t_hi = sens(sol_hi);
    if (t_hi > t_lo * (1.0 + 1e-9))
      throw NumericError("sensitivity increased with beta");
  }
  if (t_hi >= t0 * (1.0 - kBisectionTol))
    return finish_at(sol_hi, hi);

  for (int i = 0; i < kMaxIterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    const auto sol = solve_at(mid);
    const double t = sens(sol);
    if (t > t_lo * (1.0 + 1e-9) || t < t_hi * (1.0 - 1e-9))
      throw NumericError("sensitivity is not monotone in beta");
    if (std::abs(t - t0) <= kBisectionTol * t0)
      return finish_at(sol, mid);
    if (t > t0) {
      lo = mid;
      t_lo = t;
    } else {
      hi = mid;
      t_hi = t;
    }
  }
  throw ConvergenceError("beta bisection did not converge");
}

DesignResult min_sensitivity_complex(const DesignProblem& problem) {
  check_problem(problem);
  const SpdSolver<Eigen::MatrixXd> solver(problem.metric, "S");
  const Eigen::VectorXcd x = solver.solve(problem.look_vector);
  const double q = std::real(problem.look_vector.dot(x));
  if (!(q >= kDegenerateTol))
    throw DegenerateError("zero look manifold");
  auto r = finish(problem, x.conjugate() / q, false, "min_sensitivity_complex");
  r.condition_number = solver.condition();
  r.lagrange_lambda = 1.0 / q;
  return r;
}

DesignResult min_sensitivity_real(const DesignProblem& problem) {
  check_problem(problem);
  const auto sol = real_solution(problem.metric, problem.look_vector, "S");
  auto r = finish(problem, sol.w.cast<cplx>(), true, "min_sensitivity_real");
  r.phase_phi = sol.phi;
  r.condition_number = sol.condition;
  r.lagrange_lambda = sol.lambda;
  return r;
}

} // namespace realbf
