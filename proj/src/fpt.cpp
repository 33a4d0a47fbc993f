#include "cirsim/fpt.hpp"

#include "cirsim/errors.hpp"

#include <cmath>

namespace cirsim::fpt {

namespace {

using std::numbers::pi;

constexpr double kPiSq8 = pi * pi / 8.0;

// Small-time branch: sum over images at +-1, +-3, +-5.
double small_time_density(double t)
{
    const double inv2t = 0.5 / t;
    const double prefactor = 2.0 / std::sqrt(2.0 * pi * t * t * t);
    return prefactor *
           (std::exp(-inv2t) - 3.0 * std::exp(-9.0 * inv2t) + 5.0 * std::exp(-25.0 * inv2t));
}

// Integral of a/sqrt(2 pi s^3) exp(-a^2 / 2s) over [0, t] is erfc(a / sqrt(2t)).
double small_time_cdf(double t)
{
    const double s = 1.0 / std::sqrt(2.0 * t);
    return 2.0 * (std::erfc(s) - std::erfc(3.0 * s) + std::erfc(5.0 * s));
}

double large_time_density(double t)
{
    const double e = kPiSq8 * t;
    return 0.5 * pi * (std::exp(-e) - 3.0 * std::exp(-9.0 * e) + 5.0 * std::exp(-25.0 * e));
}

// Antiderivative of large_time_density up to an additive constant, negated.
double large_time_tail(double t)
{
    const double e = kPiSq8 * t;
    return (4.0 / pi) * (std::exp(-e) - std::exp(-9.0 * e) / 3.0 + std::exp(-25.0 * e) / 5.0);
}

// Large-time branch constant chosen so that the CDF is continuous at 2/pi.
const double kLargeTimeConstant = small_time_cdf(kBranchPoint) + large_time_tail(kBranchPoint);

} // namespace

double fpt_density(double t)
{
    if (!(t > 0.0)) {
        throw DomainError("fpt_density: t must be positive");
    }
    return t <= kBranchPoint ? small_time_density(t) : large_time_density(t);
}

double fpt_cdf(double t)
{
    if (!(t >= 0.0)) {
        throw DomainError("fpt_cdf: t must be non-negative");
    }
    if (t == 0.0) {
        return 0.0;
    }
    if (std::isinf(t)) {
        return kLargeTimeConstant;
    }
    return t <= kBranchPoint ? small_time_cdf(t) : kLargeTimeConstant - large_time_tail(t);
}

double fpt_inverse(double u, const InverseOptions& options)
{
    if (!(u > 0.0 && u < 1.0)) {
        throw DomainError("fpt_inverse: u must lie in (0, 1)");
    }
    double lo = options.lower;
    double hi = options.upper;
    double x = options.initial_guess;
    if (!(x > lo && x < hi)) {
        x = 0.5 * (lo + hi);
    }
    for (int iter = 0; iter < options.max_iter; ++iter) {
        const double residual = fpt_cdf(x) - u;
        if (std::abs(residual) < options.tol) {
            return x;
        }
        if (residual < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        const double slope = fpt_density(x);
        double next = x - residual / slope;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (next == x) {
            // Bracket collapsed to adjacent doubles; the residual floor is
            // set by the CDF's own rounding.
            return x;
        }
        x = next;
    }
    throw ConvergenceError("fpt_inverse: no convergence within the iteration budget");
}

double sample_theta(RngStream& rng, double r, const InverseOptions& options)
{
    if (!(r > 0.0)) {
        throw DomainError("sample_theta: r must be positive");
    }
    return r * r * fpt_inverse(rng.uniform(), options);
}

} // namespace cirsim::fpt
