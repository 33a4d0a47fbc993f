#pragma once

#include <vector>

// Bessel functions of the first kind of real order nu > -1.
namespace cirsim::bessel {

// J_nu(x) for nu > -1 and x >= 0. Uses the ascending series for x <= 12 and
// Miller's backward recurrence, normalized by
//   (x/2)^nu = sum_k (nu + 2k) Gamma(nu + k) / k! J_{nu+2k}(x),
// for larger x. Throws DomainError for nu <= -1, x < 0, non-finite input, or
// x = 0 with nu < 0 (J_nu is unbounded there).
double bessel_j(double nu, double x);

// J_nu(x) / x^nu, which is entire in x and equals 1 / (2^nu Gamma(nu + 1))
// at x = 0.
double bessel_j_over_power(double nu, double x);

// Derivative of J_nu at x > 0.
// (scale / x)^nu J_nu(x), with the x -> 0 limit (scale / 2)^nu / Gamma(nu + 1).
// Intermediate powers are kept in extended precision, so large orders with
// scale ~ nu do not overflow.
double bessel_j_rescaled(double nu, double scale, double x);

double bessel_j_prime(double nu, double x);

// The first `count` positive zeros of J_nu, strictly increasing. Each zero is
// bracketed by a sign-change scan and polished by Newton's method started
// from McMahon's expansion. Throws ConvergenceError if polishing fails.
std::vector<double> bessel_zeros(double nu, int count);

// m-th positive zero (m >= 1).
double bessel_zero(double nu, int m);

// McMahon's large-m expansion of the m-th zero.
double mcmahon_zero(double nu, int m);

} // namespace cirsim::bessel
