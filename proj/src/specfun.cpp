#include "realbf/specfun.hpp"

#include "realbf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace realbf::specfun {

namespace {

constexpr double kPi = std::numbers::pi;

double clamp_unit(double x) {
  if (std::abs(x) > 1.0 + 1e-12)
    throw DomainError("Legendre argument outside [-1, 1]: " + std::to_string(x));
  return std::clamp(x, -1.0, 1.0);
}

void check_order(int n) {
  if (n < 0)
    throw DomainError("negative order " + std::to_string(n));
}

// i^k for integer k (any sign).
cplx i_pow(int k) {
  switch (((k % 4) + 4) % 4) {
  case 0:
    return {1.0, 0.0};
  case 1:
    return {0.0, 1.0};
  case 2:
    return {-1.0, 0.0};
  default:
    return {0.0, -1.0};
  }
}

// Derivatives from values by f_n' = f_{n-1} - (n+1)/x f_n, f_0' = -f_1.
// values must hold at least n_max + 2 entries.
std::vector<double> derivs_from_values(const std::vector<double>& f, int n_max, double x) {
  std::vector<double> df(n_max + 1);
  df[0] = -f[1];
  for (int n = 1; n <= n_max; ++n)
    df[n] = f[n - 1] - (n + 1) / x * f[n];
  return df;
}

} // namespace

double legendre_p(int n, double x) {
  check_order(n);
  x = clamp_unit(x);
  if (x == 1.0)
    return 1.0;
  if (x == -1.0)
    return (n % 2 == 0) ? 1.0 : -1.0;
  double p_prev = 1.0;
  if (n == 0)
    return p_prev;
  double p = x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2 * k + 1) * x * p - k * p_prev) / (k + 1);
    p_prev = p;
    p = next;
  }
  return p;
}

std::vector<double> legendre_p_all(int n_max, double x) {
  check_order(n_max);
  x = clamp_unit(x);
  std::vector<double> p(n_max + 1);
  p[0] = 1.0;
  if (n_max >= 1)
    p[1] = x;
  for (int k = 1; k < n_max; ++k)
    p[k + 1] = ((2 * k + 1) * x * p[k] - k * p[k - 1]) / (k + 1);
  if (x == 1.0 || x == -1.0) {
    for (int k = 0; k <= n_max; ++k)
      p[k] = (x > 0.0 || k % 2 == 0) ? 1.0 : -1.0;
  }
  return p;
}

std::vector<cplx> sph_harmonics_all(int n_max, double theta, double phi) {
  check_order(n_max);
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  std::vector<cplx> out(static_cast<std::size_t>((n_max + 1) * (n_max + 1)));

  // Fully normalised associated Legendre functions, column by column in m.
  // pmm holds \bar P_m^m (with the Condon-Shortley sign) as m increases.
  double pmm = std::sqrt(1.0 / (4.0 * kPi));
  for (int m = 0; m <= n_max; ++m) {
    if (m > 0)
      pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * st;
    const cplx eimp = std::polar(1.0, m * phi);
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;

    double p_nm2 = 0.0;
    double p_nm1 = pmm;
    for (int n = m; n <= n_max; ++n) {
      double p;
      if (n == m) {
        p = pmm;
      } else if (n == m + 1) {
        p = std::sqrt(2.0 * m + 3.0) * ct * pmm;
      } else {
        const double nn = n;
        const double mm = m;
        const double a = std::sqrt((4.0 * nn * nn - 1.0) / (nn * nn - mm * mm));
        const double b = std::sqrt(((nn - 1.0) * (nn - 1.0) - mm * mm) /
                                   (4.0 * (nn - 1.0) * (nn - 1.0) - 1.0));
        p = a * (ct * p_nm1 - b * p_nm2);
      }
      if (n > m) {
        p_nm2 = p_nm1;
        p_nm1 = p;
      }
      const cplx y = p * eimp;
      out[sh_index(n, m)] = y;
      if (m > 0)
        out[sh_index(n, -m)] = sign * std::conj(y);
    }
  }
  return out;
}

cplx sph_harmonic(int n, int m, double theta, double phi) {
  check_order(n);
  if (std::abs(m) > n)
    throw IndexError("spherical harmonic order |m| > n (n=" + std::to_string(n) +
                     ", m=" + std::to_string(m) + ")");
  return sph_harmonics_all(n, theta, phi)[sh_index(n, m)];
}

std::vector<double> sph_bessel_j_all(int n_max, double x) {
  check_order(n_max);
  if (x < 0.0)
    throw DomainError("spherical Bessel j_n needs x >= 0, got " + std::to_string(x));
  std::vector<double> j(n_max + 1, 0.0);
  if (x == 0.0) {
    j[0] = 1.0;
    return j;
  }
  const double j0 = std::sin(x) / x;
  const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;

  if (x > n_max) {
    j[0] = j0;
    if (n_max >= 1)
      j[1] = j1;
    for (int n = 1; n < n_max; ++n)
      j[n + 1] = (2 * n + 1) / x * j[n] - j[n - 1];
    return j;
  }

  // Miller: start well above both n_max and x, recur downward, rescale on
  // the fly to keep away from overflow, then normalise.
  const int start = n_max + 20 + static_cast<int>(std::sqrt(40.0 * (n_max + x + 1.0)));
  constexpr double kBig = 1e250;
  std::vector<double> f(start + 2, 0.0);
  f[start] = 1e-300;
  for (int n = start; n >= 1; --n) {
    f[n - 1] = (2 * n + 1) / x * f[n] - f[n + 1];
    if (std::abs(f[n - 1]) > kBig) {
      for (int k = n - 1; k <= start; ++k)
        f[k] /= kBig;
    }
  }
  const double scale = (std::abs(j0) >= std::abs(j1)) ? j0 / f[0] : j1 / f[1];
  for (int n = 0; n <= n_max; ++n)
    j[n] = f[n] * scale;
  return j;
}

std::vector<double> sph_bessel_y_all(int n_max, double x) {
  check_order(n_max);
  if (!(x > 0.0))
    throw DomainError("spherical Bessel y_n needs x > 0, got " + std::to_string(x));
  std::vector<double> y(n_max + 1);
  y[0] = -std::cos(x) / x;
  if (n_max >= 1)
    y[1] = -std::cos(x) / (x * x) - std::sin(x) / x;
  for (int n = 1; n < n_max; ++n)
    y[n + 1] = (2 * n + 1) / x * y[n] - y[n - 1];
  return y;
}

double sph_bessel(BesselKind kind, int n, double x) {
  check_order(n);
  if (kind == BesselKind::j)
    return sph_bessel_j_all(n, x)[n];
  return sph_bessel_y_all(n, x)[n];
}

double sph_bessel_deriv(BesselKind kind, int n, double x) {
  check_order(n);
  if (kind == BesselKind::j) {
    if (x == 0.0)
      return n == 1 ? 1.0 / 3.0 : 0.0;
    const auto j = sph_bessel_j_all(n + 1, x);
    return derivs_from_values(j, n, x)[n];
  }
  const auto y = sph_bessel_y_all(n + 1, x);
  return derivs_from_values(y, n, x)[n];
}

cplx sph_hankel2(int n, double x) {
  return {sph_bessel(BesselKind::j, n, x), -sph_bessel(BesselKind::y, n, x)};
}

cplx sph_hankel2_deriv(int n, double x) {
  return {sph_bessel_deriv(BesselKind::j, n, x), -sph_bessel_deriv(BesselKind::y, n, x)};
}

namespace {

// 4 pi i^{n-1} / (x^2 h'), with h' = dj - i dy formed without overflow.
// An overflowed y_n' means |h_n'| is beyond double range and b_n is zero.
cplx mode_strength_from_deriv(int n, double x, double dj, double dy) {
  if (!std::isfinite(dy))
    return {0.0, 0.0};
  const double a = dj;
  const double b = -dy;
  const double s = std::max(std::abs(a), std::abs(b));
  if (s == 0.0)
    throw NumericError("h_n'(kr) underflowed to zero (n=" + std::to_string(n) +
                       ", kr=" + std::to_string(x) + ")");
  const double as = a / s;
  const double bs = b / s;
  // 1 / (s (as + i bs)) = (as - i bs) / (s (as^2 + bs^2))
  const double den = s * (as * as + bs * bs) * x * x;
  const cplx inv_h{as / den, -bs / den};
  return 4.0 * kPi * i_pow(n - 1) * inv_h;
}

} // namespace

cplx mode_strength(int n, double kr) {
  check_order(n);
  if (!(kr > 0.0))
    throw DomainError("mode strength needs kr > 0, got " + std::to_string(kr));
  return mode_strength_spectrum(n, kr).values[n];
}

ModeStrengthSpectrum mode_strength_spectrum(int order_max, double kr) {
  check_order(order_max);
  if (!(kr > 0.0))
    throw DomainError("mode strength needs kr > 0, got " + std::to_string(kr));
  const auto j = sph_bessel_j_all(order_max + 1, kr);
  const auto y = sph_bessel_y_all(order_max + 1, kr);
  const auto dj = derivs_from_values(j, order_max, kr);
  const auto dy = derivs_from_values(y, order_max, kr);

  ModeStrengthSpectrum out;
  out.order_max = order_max;
  out.kr = kr;
  out.values.resize(order_max + 1);
  for (int n = 0; n <= order_max; ++n)
    out.values[n] = mode_strength_from_deriv(n, kr, dj[n], dy[n]);
  return out;
}

QuadratureRule gauss_legendre(int points, double a, double b) {
  if (points < 1)
    throw DomainError("Gauss-Legendre rule needs at least one point");
  QuadratureRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  const int n = points;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Newton from the Chebyshev-like initial guess.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 1; k < n; ++k) {
        const double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

} // namespace realbf::specfun
