#include "doctest.h"

#include "realbf/errors.hpp"
#include "realbf/geometry.hpp"
#include "realbf/specfun.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

using namespace realbf;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;

double deg(double d) { return d * kPi / 180.0; }

// Linear model with lambda = 2 d at c = 343: f = 343 / (2 d).
ArrayModel half_wave_linear(int m, double d = 0.1) {
  return ArrayModel::linear(m, d, 343.0 / (2.0 * d));
}
} // namespace

TEST_CASE("linear manifold") {
  const auto broadside = manifold(half_wave_linear(3), {kPi / 2, 0.0});
  for (int q = 0; q < 3; ++q)
    CHECK(std::abs(broadside[q] - 1.0) < 1e-15);

  const auto endfire = manifold(half_wave_linear(2), {0.0, 0.0});
  CHECK(std::abs(endfire[0] - 1.0) < 1e-15);
  CHECK(std::abs(endfire[1] + 1.0) < 1e-15);

  CHECK_THROWS_AS(manifold(half_wave_linear(2), {-0.1, 0.0}), DomainError);
  CHECK_THROWS_AS(manifold(half_wave_linear(2), {kPi + 0.1, 0.0}), DomainError);
  CHECK_THROWS_AS(ArrayModel::linear(0, 0.1, 1000.0), DomainError);
  CHECK_THROWS_AS(ArrayModel::linear(3, 0.0, 1000.0), DomainError);
}

TEST_CASE("linear model equals collinear open model") {
  const int m = 7;
  const double d = 0.043;
  const double f = 2900.0;
  const auto lin = ArrayModel::linear(m, d, f);
  std::vector<Eigen::Vector3d> pos;
  for (int q = 0; q < m; ++q)
    pos.emplace_back(0.0, 0.0, q * d);
  const auto open = ArrayModel::open(pos, f);
  for (double t : {0.0, 0.3, 1.0, kPi / 2, 2.5, kPi}) {
    for (double p : {0.0, 1.7, 4.0}) {
      const auto a = manifold(lin, {t, p});
      const auto b = manifold(open, {t, p});
      CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("open-array conjugate symmetry for real weights") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  std::vector<Eigen::Vector3d> pos;
  for (int q = 0; q < 9; ++q)
    pos.emplace_back(u(rng), u(rng), u(rng));
  const OpenGeometry g{pos};
  Eigen::VectorXd w(9);
  for (int q = 0; q < 9; ++q)
    w[q] = u(rng);
  std::uniform_real_distribution<double> ang(0.0, 1.0);
  const double k = 2 * kPi * 1500.0 / 343.0;
  for (int i = 0; i < 100; ++i) {
    const Direction dir{std::acos(1 - 2 * ang(rng)), 2 * kPi * ang(rng)};
    const Eigen::Vector3d k0 = -k * unit_vector(dir);
    const cplx forward = (w.cast<cplx>().transpose() * open_manifold(g, k0)).value();
    const cplx reverse = (w.cast<cplx>().transpose() * open_manifold(g, -k0)).value();
    CHECK(std::abs(reverse - std::conj(forward)) < 1e-12);
  }
}

TEST_CASE("linear pattern with real weights is mirror symmetric") {
  const auto model = ArrayModel::linear(6, 0.07, 1800.0);
  const Eigen::VectorXd w = (Eigen::VectorXd(6) << 0.3, -1.1, 0.4, 2.0, 0.1, -0.7).finished();
  for (double t = 0.0; t <= kPi; t += 0.05) {
    const cplx b1 = w.cast<cplx>().transpose() * manifold(model, {t, 0.0});
    const cplx b2 = w.cast<cplx>().transpose() * manifold(model, {kPi - t, 0.0});
    CHECK(std::abs(std::abs(b1) - std::abs(b2)) < 1e-12);
  }
}

TEST_CASE("spherical manifold at the look direction") {
  const auto model = ArrayModel::spherical_kr(4, 3.0);
  CHECK(model.kr() == Approx(3.0).epsilon(1e-14));
  CHECK(model.manifold_size() == 5);
  const auto v = manifold(model, {0.0, 0.0});
  for (int n = 0; n <= 4; ++n)
    CHECK(std::abs(v[n] - specfun::mode_strength(n, 3.0) * (2.0 * n + 1) / (4 * kPi)) < 1e-14);
}

TEST_CASE("angle_between") {
  const Direction a{1.1, 2.3};
  CHECK(angle_between(a, a) == Approx(0.0));
  CHECK(angle_between({kPi / 2, 0.0}, {kPi / 2, kPi}) == Approx(kPi).epsilon(1e-15));
  CHECK(angle_between(direction_from_degrees(100, 160), direction_from_degrees(80, 340)) ==
        Approx(kPi).epsilon(1e-15));
  const auto ap = antipode(direction_from_degrees(100, 160));
  CHECK(ap.theta == Approx(deg(80)));
  CHECK(ap.phi == Approx(deg(340)));
  CHECK(angle_between({0.3, 0.0}, {0.8, 0.0}) == Approx(0.5).epsilon(1e-14));
}

TEST_CASE("sampling layouts") {
  const auto fib = fibonacci_layout(32);
  CHECK(fib.size() == 32);
  CHECK(fib.max_order() == 4);
  double sum = 0.0;
  for (double a : fib.alpha)
    sum += a;
  CHECK(sum == Approx(4 * kPi));

  const auto gl = gauss_layout(3);
  CHECK(gl.size() == 4 * 8);
  sum = 0.0;
  for (double a : gl.alpha)
    sum += a;
  CHECK(sum == Approx(4 * kPi).epsilon(1e-13));

  SUBCASE("json round trip") {
    const auto back = layout_from_json_text(layout_to_json_text(fib));
    REQUIRE(back.size() == fib.size());
    for (int i = 0; i < fib.size(); ++i) {
      CHECK(back.points[i].theta == fib.points[i].theta);
      CHECK(back.points[i].phi == fib.points[i].phi);
      CHECK(back.alpha[i] == fib.alpha[i]);
    }
  }

  SUBCASE("validation") {
    CHECK_THROWS_AS(layout_from_json_text("{"), InputError);
    CHECK_THROWS_AS(layout_from_json_text(R"({"M": 2, "points": [[0,0]], "alpha": [1]})"),
                    InputError);
    CHECK_THROWS_AS(
        layout_from_json_text(R"({"M": 1, "points": [[0,0]], "alpha": [1], "extra": 3})"),
        InputError);
    CHECK_THROWS_AS(layout_from_json_text(R"({"M": 1, "points": [[4,0]], "alpha": [1]})"),
                    InputError);
    CHECK_THROWS_AS(layout_from_json_text(R"({"M": 1, "points": [[1,0]], "alpha": [-1]})"),
                    InputError);
    CHECK_THROWS_AS(load_layout("/nonexistent/layout.json"), InputError);
  }
}

TEST_CASE("steering phase-mode weights") {
  const auto layout = fibonacci_layout(36);
  const Direction look = direction_from_degrees(100, 160);

  SUBCASE("only the n = 0 term gives constant weights") {
    const auto d = WeightVector::make_real(Eigen::VectorXd::Unit(3, 0), Domain::phase_mode, look);
    const auto s = steer(d, look, layout);
    for (int i = 0; i < layout.size(); ++i)
      CHECK(s.values[i].real() == Approx(1.0 / (4 * kPi)).epsilon(1e-14));
  }

  SUBCASE("real d gives exactly real spatial weights") {
    const Eigen::VectorXd dv = (Eigen::VectorXd(5) << 0.2, -1.0, 3.0, 0.7, -0.1).finished();
    const auto s = steer(WeightVector::make_real(dv, Domain::phase_mode, look), look, layout);
    CHECK(s.value_class == ValueClass::real);
    for (int i = 0; i < layout.size(); ++i)
      CHECK(s.values[i].imag() == 0.0);
  }

  SUBCASE("linear in d") {
    Eigen::VectorXcd d1(4), d2(4);
    d1 << cplx{1, 2}, cplx{0, -1}, cplx{0.5, 0}, cplx{-2, 1};
    d2 << cplx{0.3, 0}, cplx{1, 1}, cplx{-1, 0.2}, cplx{0, 0};
    const cplx a{0.7, -1.3};
    const auto s1 = steer(WeightVector::make_complex(d1, Domain::phase_mode, look), look, layout);
    const auto s2 = steer(WeightVector::make_complex(d2, Domain::phase_mode, look), look, layout);
    const auto s12 = steer(WeightVector::make_complex(a * d1 + d2, Domain::phase_mode, look),
                           look, layout);
    CHECK((s12.values - (a * s1.values + s2.values)).cwiseAbs().maxCoeff() < 1e-13);
  }

  SUBCASE("layout size checks") {
    const auto d = WeightVector::make_real(Eigen::VectorXd::Ones(7), Domain::phase_mode, look);
    CHECK_THROWS_AS(steer(d, look, layout), InputError);
    const auto s = steer(d, look, layout, /*allow_undersampled=*/true);
    CHECK(s.undersampled);
    const auto spatial = WeightVector::make_real(Eigen::VectorXd::Ones(3), Domain::spatial, look);
    CHECK_THROWS_AS(steer(spatial, look, layout), InputError);
  }
}

TEST_CASE("steered spatial output equals the phase-mode beampattern") {
  // Exact-quadrature layout; pressure of an order-limited plane wave built by
  // the explicit double sum over Y_n^m (independent of the steering path).
  const int order = 4;
  const double kr = 3.0;
  const auto layout = gauss_layout(order);
  const auto b = specfun::mode_strength_spectrum(order, kr).values;
  const Direction look = direction_from_degrees(100, 160);
  const Eigen::VectorXd dv = (Eigen::VectorXd(5) << 1.0, -0.4, 2.0, 0.3, -1.2).finished();
  const auto steered = steer(WeightVector::make_real(dv, Domain::phase_mode, look), look, layout);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const Direction src{std::acos(1 - 2 * u(rng)), 2 * kPi * u(rng)};
    const auto ysrc = specfun::sph_harmonics_all(order, src.theta, src.phi);
    Eigen::VectorXcd p(layout.size());
    for (int i = 0; i < layout.size(); ++i) {
      const auto yi = specfun::sph_harmonics_all(order, layout.points[i].theta,
                                                 layout.points[i].phi);
      cplx acc{0, 0};
      for (int n = 0; n <= order; ++n)
        for (int m = -n; m <= n; ++m)
          acc += b[n] * std::conj(ysrc[specfun::sh_index(n, m)]) * yi[specfun::sh_index(n, m)];
      p[i] = acc;
    }
    const double Theta = angle_between(src, look);
    const cplx spatial = steered.output(p);
    const cplx phase_mode = dv.cast<cplx>().transpose() * phase_mode_manifold(b, Theta);
    CHECK(std::abs(spatial - phase_mode) < 1e-8);
  }
}
