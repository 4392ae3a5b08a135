#include "doctest.h"

#include "realbf/analysis.hpp"
#include "realbf/design.hpp"
#include "realbf/errors.hpp"
#include "realbf/specfun.hpp"

#include "oracles.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace realbf;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;

using oracle::brute_force_real_di;

Eigen::MatrixXcd random_pd(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXcd a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      a(i, j) = {g(rng), g(rng)};
  return a * a.adjoint() + 0.1 * Eigen::MatrixXcd::Identity(m, m);
}

Eigen::VectorXcd random_b(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXcd b(m);
  for (int i = 0; i < m; ++i)
    b[i] = {g(rng), g(rng)};
  return b;
}

cplx gain(const DesignResult& r, const DesignProblem& p) {
  return (r.weights.values.transpose() * p.look_vector).value();
}

ArrayModel fig1_model() { return ArrayModel::linear(25, 0.1, 1715.0); }
} // namespace

TEST_CASE("real maximum directivity matches the brute-force oracle") {
  struct Case {
    int m;
    double d_over_lambda;
    double look;
  };
  for (const auto& c : {Case{3, 0.3, 1.0}, Case{2, 0.3, 1.0}, Case{4, 0.2, 0.6}, Case{3, 0.45, 2.2}}) {
    const double lambda = 1.0;
    const auto model = ArrayModel::linear(c.m, c.d_over_lambda * lambda, 343.0 / lambda);
    const auto p = make_problem(model, {c.look, 0.0});
    const double oracle = brute_force_real_di(p.look_vector, p.cost_matrix.real(), 200000, 5);
    const auto r = max_directivity_real(p);
    CHECK(r.directivity == Approx(oracle).epsilon(1e-3));
    CHECK(r.directivity >= oracle * (1.0 - 1e-9));
  }
}

TEST_CASE("max_directivity_complex") {
  SUBCASE("identity C gives the minimum-sensitivity weights") {
    std::mt19937_64 rng(3);
    const auto b = random_b(5, rng);
    const auto p = make_problem(Eigen::MatrixXcd::Identity(5, 5), b);
    const auto r = max_directivity_complex(p);
    const Eigen::VectorXcd expect = b.conjugate() / b.squaredNorm();
    CHECK((r.weights.values - expect).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((min_sensitivity_complex(p).weights.values - expect).cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("spherical: directivity (N+1)^2 for any kr") {
    for (double kr : {0.5, 1.0, 3.0, 10.0, 25.0}) {
      const auto p = make_problem(ArrayModel::spherical_kr(10, kr), {});
      const auto r = max_directivity_complex(p);
      CHECK(r.directivity == Approx(121.0).epsilon(1e-9));
      // d_n proportional to 1 / b_n
      const auto b = specfun::mode_strength_spectrum(10, kr).values;
      const cplx k0 = r.weights.values[0] * b[0];
      for (int n = 1; n <= 10; ++n)
        CHECK(std::abs(r.weights.values[n] * b[n] - k0) < 1e-9 * std::abs(k0));
    }
    const auto r = max_directivity_complex(make_problem(ArrayModel::spherical_kr(10, 10.0), {}));
    CHECK(r.directivity_index_db == Approx(20.8279).epsilon(1e-4));
  }

  SUBCASE("single sensor") {
    const auto p = make_problem(Eigen::MatrixXcd::Ones(1, 1), Eigen::VectorXcd::Ones(1));
    const auto r = max_directivity_complex(p);
    CHECK(std::abs(r.weights.values[0] - 1.0) < 1e-15);
    CHECK(r.directivity == Approx(1.0));
    CHECK(r.directivity_index_db == Approx(0.0));
  }

  SUBCASE("singular C is reported") {
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Ones(3, 3);
    CHECK_THROWS_AS(max_directivity_complex(make_problem(c, Eigen::VectorXcd::Ones(3))),
                    SingularMatrixError);
  }
}

TEST_CASE("max_directivity_real") {
  SUBCASE("real manifold and identity C") {
    const Eigen::VectorXcd b = (Eigen::VectorXd(3) << 1.0, -2.0, 0.5).finished().cast<cplx>();
    const auto r = max_directivity_real(make_problem(Eigen::MatrixXcd::Identity(3, 3), b));
    CHECK(r.phase_phi == 0.0);
    const Eigen::VectorXcd expect = b / b.squaredNorm();
    CHECK((r.weights.values - expect).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("linear array, d = 10 cm, M = 25, 1715 Hz, 45 degrees") {
    const auto p = make_problem(fig1_model(), {kPi / 4, 0.0});
    const auto r = max_directivity_real(p);
    CHECK(r.sensitivity == Approx(0.076).epsilon(0.001 / 0.076));
    CHECK(r.weights.is_real());
    const auto c = max_directivity_complex(p);
    CHECK(c.sensitivity == Approx(0.04).epsilon(1e-12)); // C = I here
  }

  SUBCASE("phase lies in (-pi/2, pi/2] and w^T b = e^{j phi}") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 20; ++i) {
      const auto p = make_problem(random_pd(4, rng), random_b(4, rng));
      const auto r = max_directivity_real(p);
      CHECK(r.phase_phi > -kPi / 2);
      CHECK(r.phase_phi <= kPi / 2);
      CHECK(std::abs(gain(r, p) - std::polar(1.0, r.phase_phi)) < 1e-12);
      CHECK(gain(r, p).real() >= 0.0);
    }
  }

  SUBCASE("zero look vector") {
    CHECK_THROWS_AS(
        max_directivity_real(make_problem(Eigen::MatrixXcd::Identity(2, 2), Eigen::VectorXcd::Zero(2))),
        DegenerateError);
  }
}

TEST_CASE("randomised design properties") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 12);
  for (int seed = 0; seed < 50; ++seed) {
    const int m = size(rng);
    const auto c = random_pd(m, rng);
    const auto b = random_b(m, rng);
    const auto p = make_problem(c, b);
    const auto rc = max_directivity_complex(p);
    const auto rr = max_directivity_real(p);
    const auto sc = min_sensitivity_complex(p);
    const auto sr = min_sensitivity_real(p);
    for (const auto* r : {&rc, &rr, &sc, &sr}) {
      CHECK(std::abs(std::abs(gain(*r, p)) - 1.0) < 1e-9);
      CHECK(r->sensitivity >= r->bound_complex * (1 - 1e-9));
      CHECK(r->bound_real >= r->bound_complex - 1e-12);
    }
    CHECK(rr.sensitivity >= rr.bound_real - 1e-9);
    CHECK(sr.sensitivity >= sr.bound_real - 1e-9);
    CHECK(rr.directivity <= rc.directivity * (1 + 1e-9));
    CHECK(rr.weights.values.imag().cwiseAbs().maxCoeff() == 0.0);
    CHECK(sr.weights.values.imag().cwiseAbs().maxCoeff() == 0.0);

    // zero imaginary part of c^T Re{C}^-1 b e^{-j phi}
    const Eigen::MatrixXd ct = c.real();
    const Eigen::VectorXd cvec = (b * std::polar(1.0, -rr.phase_phi)).real();
    const Eigen::VectorXd x = ct.llt().solve(cvec);
    const cplx q = (x.cast<cplx>().transpose() * b).value() * std::polar(1.0, -rr.phase_phi);
    CHECK(std::abs(q.imag()) < 1e-10 * std::abs(q));

    // scale invariance of the real design
    const auto scaled = max_directivity_real(make_problem(c * 37.5, b));
    CHECK((scaled.weights.values - rr.weights.values).cwiseAbs().maxCoeff() <
          1e-12 * rr.weights.values.cwiseAbs().maxCoeff());

    // minimum-sensitivity designs attain the bounds
    CHECK(sc.sensitivity == Approx(sc.bound_complex).epsilon(1e-10));
    CHECK(sr.sensitivity == Approx(sr.bound_real).epsilon(1e-10));
  }
}

TEST_CASE("bounded_sensitivity_real") {
  SUBCASE("inactive cap") {
    const auto p = make_problem(fig1_model(), {kPi / 4, 0.0});
    const auto r = bounded_sensitivity_real(p, std::numeric_limits<double>::infinity());
    const auto free = max_directivity_real(p);
    CHECK(r.beta == 0.0);
    CHECK((r.weights.values - free.weights.values).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("cap at the real bound approaches the minimum-sensitivity design") {
    const auto p = make_problem(ArrayModel::spherical_kr(6, 2.0), {});
    const auto ms = min_sensitivity_real(p);
    const auto r = bounded_sensitivity_real(p, ms.bound_real * (1 + 1e-9));
    CHECK(r.beta > 0.0);
    CHECK(std::abs(r.directivity_index_db - ms.directivity_index_db) < 0.1);
    CHECK(r.sensitivity <= ms.bound_real * (1 + 1e-6));
  }

  SUBCASE("spherical N = 10, kr = 10, cap -21 dB") {
    // With 121 microphones the real bound is -20.6 dB; 135 puts -21 dB
    // between the bound and the unconstrained design.
    const auto p = make_problem(ArrayModel::spherical_kr(10, 10.0), {}, CostFunction::sin(), 135);
    const auto free = max_directivity_real(p);
    const auto ms = min_sensitivity_real(p);
    const double t0 = std::pow(10.0, -21.0 / 10.0);
    REQUIRE(free.sensitivity > t0);
    REQUIRE(ms.bound_real < t0);
    const auto r = bounded_sensitivity_real(p, t0);
    CHECK(r.beta > 0.0);
    CHECK(r.sensitivity_db == Approx(-21.0).epsilon(0.01 / 21.0));
    CHECK(r.directivity_index_db <= free.directivity_index_db + 1e-9);
    CHECK(r.directivity_index_db >= ms.directivity_index_db - 1e-9);
    CHECK(std::abs(std::abs(gain(r, p)) - 1.0) < 1e-9);
  }

  SUBCASE("beta sweep is monotone") {
    const auto p = make_problem(ArrayModel::spherical_kr(8, 3.0), {});
    const auto free = max_directivity_real(p);
    const auto ms = min_sensitivity_real(p);
    double prev_t = std::numeric_limits<double>::infinity();
    double prev_di = std::numeric_limits<double>::infinity();
    for (double frac : {0.9, 0.7, 0.5, 0.3, 0.1, 0.01}) {
      const double t0_db = ms.sensitivity_db + frac * (free.sensitivity_db - ms.sensitivity_db);
      const auto r = bounded_sensitivity_real(p, std::pow(10.0, t0_db / 10.0));
      CHECK(r.sensitivity_db == Approx(t0_db).epsilon(1e-5));
      CHECK(r.sensitivity < prev_t);
      CHECK(r.directivity_index_db < prev_di + 1e-9);
      prev_t = r.sensitivity;
      prev_di = r.directivity_index_db;
    }
  }

  SUBCASE("cap below the real bound is infeasible") {
    const auto p = make_problem(ArrayModel::spherical_kr(10, 10.0), {});
    CHECK_THROWS_AS(bounded_sensitivity_real(p, std::pow(10.0, -30.0 / 10.0)), InfeasibleError);
    const auto ms = min_sensitivity_real(p);
    CHECK_THROWS_AS(bounded_sensitivity_real(p, ms.bound_real * 0.99), InfeasibleError);
  }
}

TEST_CASE("minimum-sensitivity designs") {
  SUBCASE("open-array reduction 1/M") {
    for (double look : {0.1, 0.8, kPi / 2, 2.5}) {
      const auto r = min_sensitivity_complex(make_problem(fig1_model(), {look, 0.0}));
      CHECK(r.sensitivity == Approx(0.04).epsilon(1e-12));
    }
  }

  SUBCASE("single channel") {
    const auto p = make_problem(Eigen::MatrixXcd::Ones(1, 1), Eigen::VectorXcd::Ones(1));
    for (const auto& r : {min_sensitivity_complex(p), min_sensitivity_real(p)}) {
      CHECK(std::abs(r.weights.values[0] - 1.0) < 1e-15);
      CHECK(r.sensitivity == Approx(1.0));
    }
  }

  SUBCASE("spherical N = 4, kr = 3.96 against projected gradient descent") {
    const auto p = make_problem(ArrayModel::spherical_kr(4, 3.96), {});
    const auto r = min_sensitivity_complex(p);
    CHECK(r.sensitivity == Approx(1.0 / p.look_vector.dot(p.metric.inverse().cast<cplx>() *
                                                           p.look_vector).real())
                               .epsilon(1e-12));
    // minimise w^H U w on the affine set w^T b = 1 by projected gradient
    const Eigen::VectorXcd b = p.look_vector;
    const Eigen::VectorXcd bc = b.conjugate();
    Eigen::VectorXcd w = bc / b.squaredNorm();
    const double step = 0.5 / p.metric.diagonal().maxCoeff();
    for (int it = 0; it < 20000; ++it) {
      Eigen::VectorXcd grad = p.metric.cast<cplx>() * w;
      grad -= bc * (b.transpose() * grad).value() / b.squaredNorm(); // stay on the set
      w -= step * grad;
    }
    const double t = std::real(w.dot(p.metric.cast<cplx>() * w));
    CHECK(r.sensitivity == Approx(t).epsilon(1e-9));
  }

  SUBCASE("real and complex bounds") {
    const Eigen::VectorXcd real_b = (Eigen::VectorXd(3) << 0.5, 1.0, -2.0).finished().cast<cplx>();
    const auto rb = sensitivity_bounds(real_b);
    CHECK(rb.real_bound == Approx(rb.complex_bound).epsilon(1e-14));
    CHECK(rb.gamma_max == Approx(real_b.squaredNorm()));

    Eigen::VectorXcd bi(2);
    bi << 1.0, cplx{0, 1};
    const auto ib = sensitivity_bounds(bi);
    CHECK(ib.gamma_max == Approx(1.0));
    CHECK(ib.real_bound == Approx(1.0));
    CHECK(ib.complex_bound == Approx(0.5));
    const auto sr = min_sensitivity_real(make_problem(Eigen::MatrixXcd::Identity(2, 2), bi));
    CHECK(sr.sensitivity == Approx(1.0));

    const auto open = sensitivity_bounds(make_problem(fig1_model(), {0.4, 0.0}).look_vector);
    CHECK(open.complex_bound == Approx(1.0 / 25).epsilon(1e-12));
  }

  SUBCASE("trace identity and the bound ordering") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 100; ++i) {
      const auto b = random_b(1 + i % 9, rng);
      const auto bounds = sensitivity_bounds(b);
      CHECK(bounds.real_bound >= bounds.complex_bound * (1 - 1e-12));
      if (i < 20) {
        const Eigen::MatrixXd gram = (b * b.adjoint()).real();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        CHECK(es.eigenvalues().sum() == Approx(b.squaredNorm()).epsilon(1e-12));
        CHECK(bounds.mu == Approx(b.squaredNorm()).epsilon(1e-12));
      }
    }
  }

  SUBCASE("zero manifold") {
    CHECK_THROWS_AS(sensitivity_bounds(Eigen::VectorXcd::Zero(3)), DegenerateError);
    CHECK_THROWS_AS(
        min_sensitivity_complex(make_problem(Eigen::MatrixXcd::Identity(2, 2), Eigen::VectorXcd::Zero(2))),
        DegenerateError);
  }
}
