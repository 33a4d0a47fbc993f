#include "cirsim/near_zero.hpp"

#include "cirsim/bessel.hpp"
#include "cirsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cirsim::near_zero {

namespace {

double clamp_unit(double u)
{
    return std::clamp(u, 0.0, 1.0);
}

double series_sum(const FourierBesselTable& table, double t_tilde, double x_tilde)
{
    double sum = 0.0;
    for (std::size_t m = 0; m < table.zeros.size(); ++m) {
        const double j = table.zeros[m];
        sum += table.weights[m] * radial_profile(table.order_nu, j, x_tilde) *
               std::exp(-j * j * t_tilde);
    }
    return sum;
}

} // namespace

FourierBesselTable build_table_for_level(double gamma, double level_l, double sigma, int truncation_M)
{
    if (!std::isfinite(gamma) || !(gamma < 0.5)) {
        throw DomainError("build_table: gamma must be below 1/2 (Bessel order above -1)");
    }
    if (!(level_l > 0.0) || !std::isfinite(level_l)) {
        throw DomainError("build_table: band level must be positive");
    }
    if (!(sigma > 0.0)) {
        throw DomainError("build_table: sigma must be positive");
    }
    if (truncation_M < 1) {
        throw DomainError("build_table: truncation must be at least 1");
    }
    if (gamma < kMinGamma) {
        throw DomainError("build_table: gamma below " + std::to_string(kMinGamma) +
                          " (Bessel order above 1000) is not supported");
    }

    FourierBesselTable table;
    table.gamma = gamma;
    table.order_nu = -2.0 * gamma;
    table.level_l = level_l;
    table.sigma = sigma;
    table.truncation_M = truncation_M;
    table.zeros = bessel::bessel_zeros(table.order_nu, truncation_M);

    const double l_pow_gamma = std::pow(level_l, gamma);
    for (double j : table.zeros) {
        const double denom = j * bessel::bessel_j(table.order_nu + 1.0, j);
        table.eigenvalues.push_back(sigma * sigma * j * j / (8.0 * level_l));
        table.coefficients.push_back(-2.0 / (l_pow_gamma * denom));
        table.weights.push_back(1.0 / denom);
    }
    return table;
}

FourierBesselTable build_table(const CirParams& params, double r, double band_A, double band_a,
                               int truncation_M)
{
    if (!params.near_zero_capable()) {
        throw NearZeroUnavailable("near-zero sampler requires alpha > 0");
    }
    if (!(r > 0.0) || !(band_A > 0.0) || !(band_a > 0.0)) {
        throw DomainError("build_table: r, A and a must be positive");
    }
    const double top = band_A * std::pow(r, band_a);
    return build_table_for_level(params.gamma(), top * top, params.sigma(), truncation_M);
}

FourierBesselTable build_lower_table(const CirParams& params, double level_l, int truncation_M)
{
    if (!(level_l > 0.0) || !(level_l < params.lambda())) {
        throw DomainError("lower comparison CDF requires 0 < l < lambda");
    }
    const double sigma_sq = params.sigma() * params.sigma();
    const double gamma_minus = params.gamma() + params.k() * level_l / sigma_sq;
    return build_table_for_level(gamma_minus, level_l, params.sigma(), truncation_M);
}

double radial_profile(double nu, double zero, double x_tilde)
{
    return bessel::bessel_j_rescaled(nu, zero, zero * std::sqrt(x_tilde));
}

double u_value(const FourierBesselTable& table, double t, double x)
{
    if (!(x > 0.0 && x <= table.level_l)) {
        throw DomainError("u_value: x must lie in (0, l]");
    }
    if (!(t >= 0.0)) {
        throw DomainError("u_value: t must be non-negative");
    }
    if (x == table.level_l) {
        return 1.0;
    }
    const double x_tilde = x / table.level_l;
    double sum = 0.0;
    for (std::size_t m = 0; m < table.zeros.size(); ++m) {
        // beta_m x^gamma J_nu(j sqrt(x/l)) = -2 w_m profile(x/l); l^gamma cancels.
        const double shape = radial_profile(table.order_nu, table.zeros[m], x_tilde);
        sum += -2.0 * table.weights[m] * std::exp(-table.eigenvalues[m] * t) * shape;
    }
    return clamp_unit(1.0 + sum);
}

double u_normalized(const FourierBesselTable& table, double t_tilde, double x_tilde)
{
    if (!(x_tilde > 0.0 && x_tilde <= 1.0)) {
        throw DomainError("u_normalized: x~ must lie in (0, 1]");
    }
    if (!(t_tilde >= 0.0)) {
        throw DomainError("u_normalized: t~ must be non-negative");
    }
    if (x_tilde == 1.0) {
        return 1.0;
    }
    return clamp_unit(1.0 - 2.0 * series_sum(table, t_tilde, x_tilde));
}

double u_minus(const CirParams& params, double level_l, int truncation_M, double t, double x)
{
    return u_value(build_lower_table(params, level_l, truncation_M), t, x);
}

NormalizedExitCdf::NormalizedExitCdf(const FourierBesselTable& table, double x_tilde)
{
    amplitude_.reserve(table.zeros.size());
    rate_.reserve(table.zeros.size());
    for (std::size_t m = 0; m < table.zeros.size(); ++m) {
        const double j = table.zeros[m];
        amplitude_.push_back(-2.0 * table.weights[m] * radial_profile(table.order_nu, j, x_tilde));
        rate_.push_back(j * j);
    }
}

double NormalizedExitCdf::raw(double t_tilde) const
{
    double u = 1.0;
    for (std::size_t m = 0; m < rate_.size(); ++m) {
        u += amplitude_[m] * std::exp(-rate_[m] * t_tilde);
    }
    return u;
}

double NormalizedExitCdf::derivative(double t_tilde) const
{
    double d = 0.0;
    for (std::size_t m = 0; m < rate_.size(); ++m) {
        d -= rate_[m] * amplitude_[m] * std::exp(-rate_[m] * t_tilde);
    }
    return d;
}

double NormalizedExitCdf::value(double t_tilde) const
{
    return clamp_unit(raw(t_tilde));
}

double sample_exit_time(const FourierBesselTable& table, double x, double uniform_u, double tol)
{
    if (!(x >= 0.0 && x < table.level_l)) {
        throw DomainError("sample_exit_time: start must lie in [0, l)");
    }
    if (!(uniform_u > 0.0 && uniform_u < 1.0)) {
        throw DomainError("sample_exit_time: uniform draw must lie in (0, 1)");
    }
    const NormalizedExitCdf cdf(table, x / table.level_l);

    // Expand upward until the CDF reaches u, then walk down so that the
    // bracket holds the last crossing; the truncated series is only
    // unreliable at very small t~, where it may oscillate.
    double hi = 0.05;
    int expansions = 0;
    while (cdf.raw(hi) < uniform_u) {
        hi *= 2.0;
        if (++expansions > 80) {
            throw ConvergenceError("sample_exit_time: could not bracket the exit time");
        }
    }
    double lo = 0.5 * hi;
    constexpr double kSmallest = 1e-12;
    while (cdf.raw(lo) >= uniform_u) {
        hi = lo;
        lo *= 0.5;
        if (lo < kSmallest) {
            return 8.0 * table.level_l * hi / (table.sigma * table.sigma);
        }
    }

    double t = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double residual = cdf.raw(t) - uniform_u;
        if (std::abs(residual) < tol) {
            return 8.0 * table.level_l * t / (table.sigma * table.sigma);
        }
        if (residual < 0.0) {
            lo = t;
        } else {
            hi = t;
        }
        const double slope = cdf.derivative(t);
        double next = slope > 0.0 ? t - residual / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (next == t) {
            return 8.0 * table.level_l * t / (table.sigma * table.sigma);
        }
        t = next;
    }
    throw ConvergenceError("sample_exit_time: root polishing did not converge");
}

NearZeroSampler::NearZeroSampler(const CirParams& params, double r, double band_A, double band_a,
                                 int truncation_M, double exit_tol)
    : level_(0.0), exit_sqrt_level_(0.0), exit_tol_(exit_tol),
      upper_(build_table(params, r, band_A, band_a, truncation_M))
{
    exit_sqrt_level_ = band_A * std::pow(r, band_a);
    level_ = exit_sqrt_level_ * exit_sqrt_level_;
    if (level_ < params.lambda()) {
        lower_ = build_lower_table(params, level_, truncation_M);
    }
}

BandExit NearZeroSampler::excursion_from_uniform(double v_bar_entry, double uniform_u) const
{
    if (!(v_bar_entry >= 0.0 && v_bar_entry < level_)) {
        throw DomainError("band_excursion: entry value must lie in [0, l)");
    }
    BandExit out;
    out.exit_time = sample_exit_time(upper_, v_bar_entry, uniform_u, exit_tol_);
    out.exit_value = level_;
    if (lower_) {
        // Both tables share l and sigma, hence the normalized time.
        const double x_tilde = v_bar_entry / level_;
        const double t_tilde = upper_.sigma * upper_.sigma * out.exit_time / (8.0 * level_);
        out.cdf_gap = NormalizedExitCdf(upper_, x_tilde).value(t_tilde) -
                      NormalizedExitCdf(*lower_, x_tilde).value(t_tilde);
    } else {
        out.cdf_gap = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

BandExit NearZeroSampler::excursion(double v_bar_entry, RngStream& rng) const
{
    return excursion_from_uniform(v_bar_entry, rng.uniform());
}

BandExit band_excursion(const CirParams& params, double r, double band_A, double band_a,
                        double v_bar_entry, RngStream& rng)
{
    const NearZeroSampler sampler(params, r, band_A, band_a);
    return sampler.excursion(v_bar_entry, rng);
}

} // namespace cirsim::near_zero
