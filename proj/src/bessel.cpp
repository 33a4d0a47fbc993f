#include "cirsim/bessel.hpp"

#include "cirsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace cirsim::bessel {

namespace {

constexpr double kSeriesLimit = 12.0;

void check_order(double nu)
{
    if (!std::isfinite(nu) || !(nu > -1.0)) {
        throw DomainError("bessel: order must satisfy nu > -1, got " + std::to_string(nu));
    }
}

// sum_k (-1)^k (x/2)^{2k} / (k! Gamma(nu + k + 1)), i.e. J_nu(x) / (x/2)^nu.
long double reduced_series(double nu, double x)
{
    const long double h = 0.5L * x;
    const long double q = -h * h;
    long double term = 1.0L / std::tgamma(static_cast<long double>(nu) + 1.0L);
    long double sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= q / (static_cast<long double>(k) * (k + static_cast<long double>(nu)));
        sum += term;
        if (std::fabs(term) <= 1e-21L * std::fabs(sum) && k > h) {
            break;
        }
    }
    return sum;
}

// J_nu(x) / (x/2)^nu by backward recurrence, for x > 0. The recurrence runs
// down to the fractional order mu = nu - floor(nu) (nu itself when nu < 1),
// where the Neumann sum has bounded weights Gamma(mu + k) / k!.
long double miller_reduced(double nu, double x)
{
    const double mu = nu >= 1.0 ? nu - std::floor(nu) : nu;
    const int shift = static_cast<int>(std::lround(nu - mu));
    const double reach = std::max(x - nu, 0.0) + 40.0 + 3.0 * std::sqrt(x);
    const int top = 2 * static_cast<int>(std::ceil((shift + reach) / 2.0)) + 2;
    const long double lmu = mu;
    const long double lx = x;

    std::vector<long double> f(static_cast<std::size_t>(top) + 2, 0.0L);
    f[static_cast<std::size_t>(top)] = 1e-40L;
    for (int i = top; i >= 1; --i) {
        const auto u = static_cast<std::size_t>(i);
        f[u - 1] = (2.0L * (lmu + i) / lx) * f[u] - f[u + 1];
        if (std::fabs(f[u - 1]) > 1e1000L) {
            for (std::size_t j = u - 1; j <= static_cast<std::size_t>(top); ++j) {
                f[j] *= 1e-1000L;
            }
        }
    }

    // (x/2)^mu = Gamma(mu + 1) J_mu + sum_k (mu + 2k) Gamma(mu + k) / k! J_{mu+2k}
    long double g = std::tgamma(lmu + 1.0L);
    long double sum = g * f[0];
    for (int kk = 1; 2 * kk <= top; ++kk) {
        if (kk > 1) {
            g *= (lmu + kk - 1) / static_cast<long double>(kk);
        }
        sum += (lmu + 2.0L * kk) * g * f[static_cast<std::size_t>(2 * kk)];
    }
    const long double j_nu = f[static_cast<std::size_t>(shift)] / sum * std::pow(0.5L * lx, lmu);
    return j_nu / std::pow(0.5L * lx, static_cast<long double>(nu));
}

long double reduced(double nu, double x)
{
    return x <= kSeriesLimit ? reduced_series(nu, x) : miller_reduced(nu, x);
}

} // namespace

double bessel_j(double nu, double x)
{
    check_order(nu);
    if (!std::isfinite(x) || x < 0.0) {
        throw DomainError("bessel_j: argument must be finite and non-negative");
    }
    if (x == 0.0) {
        if (nu == 0.0) {
            return 1.0;
        }
        if (nu > 0.0) {
            return 0.0;
        }
        throw DomainError("bessel_j: J_nu(0) is unbounded for negative order");
    }
    const long double scale = std::pow(0.5L * x, static_cast<long double>(nu));
    return static_cast<double>(scale * reduced(nu, x));
}

double bessel_j_over_power(double nu, double x)
{
    check_order(nu);
    if (!std::isfinite(x) || x < 0.0) {
        throw DomainError("bessel_j_over_power: argument must be finite and non-negative");
    }
    const long double two_pow = std::pow(2.0L, static_cast<long double>(-nu));
    return static_cast<double>(two_pow * reduced(nu, x));
}

double bessel_j_rescaled(double nu, double scale, double x)
{
    check_order(nu);
    if (!std::isfinite(x) || x < 0.0 || !(scale > 0.0)) {
        throw DomainError("bessel_j_rescaled: needs x >= 0 and scale > 0");
    }
    const long double half_scale = 0.5L * scale;
    if (x == 0.0) {
        return static_cast<double>(
            std::exp(static_cast<long double>(nu) * std::log(half_scale) - std::lgamma(nu + 1.0L)));
    }
    return static_cast<double>(std::pow(half_scale, static_cast<long double>(nu)) * reduced(nu, x));
}

double bessel_j_prime(double nu, double x)
{
    if (!(x > 0.0)) {
        throw DomainError("bessel_j_prime: argument must be positive");
    }
    return (nu / x) * bessel_j(nu, x) - bessel_j(nu + 1.0, x);
}

double mcmahon_zero(double nu, int m)
{
    const double beta = (m + 0.5 * nu - 0.25) * std::numbers::pi;
    const double mu = 4.0 * nu * nu;
    const double b8 = 8.0 * beta;
    return beta - (mu - 1.0) / b8 - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8 * b8 * b8);
}

namespace {

double polish_zero(double nu, int m, double lo, double hi, double f_lo)
{
    double x = mcmahon_zero(nu, m);
    if (!(x > lo && x < hi)) {
        x = 0.5 * (lo + hi);
    }
    for (int iter = 0; iter < 200; ++iter) {
        const double f = bessel_j(nu, x);
        if (f == 0.0) {
            return x;
        }
        if ((f > 0.0) == (f_lo > 0.0)) {
            lo = x;
        } else {
            hi = x;
        }
        const double step = f / bessel_j_prime(nu, x);
        double next = x - step;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - x) <= 2e-16 * x || hi - lo <= 4e-16 * x) {
            return next;
        }
        x = next;
    }
    throw ConvergenceError("bessel_zero: polishing did not converge for m = " + std::to_string(m));
}

} // namespace

std::vector<double> bessel_zeros(double nu, int count)
{
    check_order(nu);
    if (count < 1) {
        throw DomainError("bessel_zeros: count must be at least 1");
    }
    std::vector<double> zeros;
    zeros.reserve(static_cast<std::size_t>(count));

    // J_nu > 0 on (0, j_{nu,1}); j_{nu,1} > nu for nu > 0 and is about
    // 2 sqrt(nu + 1) as nu -> -1.
    double x = nu > 0.0 ? nu : 0.5 * std::sqrt(nu + 1.0);
    double fx = bessel_j(nu, x);
    constexpr double kStep = 0.25;
    int guard = 0;
    while (static_cast<int>(zeros.size()) < count) {
        const double next = x + kStep;
        const double fn = bessel_j(nu, next);
        if (fn == 0.0) {
            zeros.push_back(next);
            x = next + 1e-9;
            fx = bessel_j(nu, x);
            continue;
        }
        if ((fn > 0.0) != (fx > 0.0)) {
            const int m = static_cast<int>(zeros.size()) + 1;
            zeros.push_back(polish_zero(nu, m, x, next, fx));
        }
        x = next;
        fx = fn;
        if (++guard > 100000) {
            throw ConvergenceError("bessel_zeros: scan did not find enough sign changes");
        }
    }
    return zeros;
}

double bessel_zero(double nu, int m)
{
    if (m < 1) {
        throw DomainError("bessel_zero: index must be at least 1");
    }
    return bessel_zeros(nu, m).back();
}

} // namespace cirsim::bessel
