#pragma once

// Special functions for phase-mode array processing: Legendre polynomials,
// orthonormal spherical harmonics, real-argument spherical Bessel functions
// and the rigid-sphere mode strength b_n(kr).
//
// Time convention is e^{+i omega t}; outgoing waves use the spherical Hankel
// function of the second kind, h_n = j_n - i y_n.

#include <complex>
#include <vector>

namespace realbf::specfun {

using cplx = std::complex<double>;

/// Legendre polynomial P_n(x) by three-term recurrence. Throws DomainError if
/// |x| > 1 + 1e-12; values marginally outside [-1,1] are clamped.
double legendre_p(int n, double x);

/// P_0(x) ... P_nmax(x) in one pass.
std::vector<double> legendre_p_all(int n_max, double x);

/// Orthonormal complex spherical harmonic Y_n^m(theta, phi) including the
/// Condon-Shortley phase. Negative orders are formed from the positive ones
/// through Y_n^{-m} = (-1)^m conj(Y_n^m), so that identity holds bit-exactly.
cplx sph_harmonic(int n, int m, double theta, double phi);

/// All Y_n^m for n <= n_max, packed at index n*n + n + m.
std::vector<cplx> sph_harmonics_all(int n_max, double theta, double phi);

inline int sh_index(int n, int m) { return n * n + n + m; }

enum class BesselKind { j, y };

/// Spherical Bessel function of the first (j) or second (y) kind.
/// x must be positive, except j_n(0) which is returned exactly.
double sph_bessel(BesselKind kind, int n, double x);

/// Derivative via f_n'(x) = f_{n-1}(x) - (n+1)/x f_n(x) (f_0' = -f_1).
double sph_bessel_deriv(BesselKind kind, int n, double x);

/// j_0..j_nmax. Upward recurrence when x > n_max, otherwise a Miller-type
/// downward recurrence normalised against j_0 (or j_1 near zeros of j_0).
std::vector<double> sph_bessel_j_all(int n_max, double x);

/// y_0..y_nmax by upward recurrence. May overflow to -inf for tiny x and
/// large n, which callers treat as an infinitely large irregular part.
std::vector<double> sph_bessel_y_all(int n_max, double x);

/// Spherical Hankel function of the second kind and its derivative.
cplx sph_hankel2(int n, double x);
cplx sph_hankel2_deriv(int n, double x);

/// Rigid-sphere mode strength
///   b_n(kr) = 4 pi i^n ( j_n(kr) - j_n'(kr) / h_n'(kr) h_n(kr) ).
/// Evaluated through the Wronskian j_n y_n' - j_n' y_n = 1/x^2, which turns
/// the bracket into -i / (x^2 h_n'(x)). Throws NumericError if h_n'
/// evaluates to exactly zero.
cplx mode_strength(int n, double kr);

struct ModeStrengthSpectrum {
  int order_max = 0;
  double kr = 0.0;
  std::vector<cplx> values; // b_0 ... b_N
};

ModeStrengthSpectrum mode_strength_spectrum(int order_max, double kr);

/// Gauss-Legendre rule on [a, b].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

QuadratureRule gauss_legendre(int points, double a = -1.0, double b = 1.0);

} // namespace realbf::specfun
