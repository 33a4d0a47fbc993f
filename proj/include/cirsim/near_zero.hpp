#pragma once

#include "cirsim/model.hpp"
#include "cirsim/rng.hpp"

#include <optional>
#include <vector>

// Exit time of the CIR process from the band (0, l), l = (A r^a)^2.
//
// The exit-time CDF is approximated by that of the comparison process
// dX+ = k lambda ds + sigma sqrt(X+) dw, whose Fourier-Bessel series is
//
//   u(t, x) = 1 - 2 (x/l)^gamma sum_m J_nu(j_m sqrt(x/l)) / (j_m J_{nu+1}(j_m))
//                                      * exp(-sigma^2 j_m^2 t / (8 l)),
//
// nu = -2 gamma, j_m the positive zeros of J_nu. In normalized variables
// x~ = x / l, t~ = sigma^2 t / (8 l) the CDF depends on gamma alone.
namespace cirsim::near_zero {

inline constexpr int kDefaultTruncation = 16;
// Tables are limited to Bessel orders up to 1000.
inline constexpr double kMinGamma = -500.0;

struct FourierBesselTable {
    double gamma = 0.0;
    double order_nu = 0.0;      // -2 gamma
    double level_l = 0.0;
    double sigma = 0.0;
    int truncation_M = 0;
    std::vector<double> zeros;        // j_m, m = 1..M
    std::vector<double> eigenvalues;  // sigma^2 j_m^2 / (8 l)
    std::vector<double> coefficients; // -2 / (l^gamma j_m J_{nu+1}(j_m)); may overflow for very negative gamma
    std::vector<double> weights;      // 1 / (j_m J_{nu+1}(j_m))
};

// Table for an arbitrary kMinGamma <= gamma < 1/2 at band level l.
FourierBesselTable build_table_for_level(double gamma, double level_l, double sigma, int truncation_M);

// Table for the upper comparison process of `params` with l = (A r^a)^2.
// Throws NearZeroUnavailable when alpha <= 0.
FourierBesselTable build_table(const CirParams& params, double r, double band_A, double band_a,
                               int truncation_M = kDefaultTruncation);

// Table for the lower comparison process dX- = k (lambda - l) ds + ...,
// i.e. gamma- = gamma + k l / sigma^2. Throws DomainError unless l < lambda.
FourierBesselTable build_lower_table(const CirParams& params, double level_l,
                                     int truncation_M = kDefaultTruncation);

// (x/l)^gamma J_nu(j sqrt(x/l)) written as j^nu * [J_nu(y) / y^nu], finite at x = 0.
double radial_profile(double nu, double zero, double x_tilde);

// Truncated series, clamped to [0, 1]. u(t, l) = 1. Throws DomainError
// unless 0 < x <= l and t >= 0.
double u_value(const FourierBesselTable& table, double t, double x);

// u~(t~, x~) = u(8 l t~ / sigma^2, l x~). Throws DomainError unless
// 0 < x~ <= 1 and t~ >= 0.
double u_normalized(const FourierBesselTable& table, double t_tilde, double x_tilde);

// Lower comparison CDF u- evaluated at (t, x).
double u_minus(const CirParams& params, double level_l, int truncation_M, double t, double x);

// t~ -> u~(t~, x~) for one fixed start level, with the x~-dependent factors
// evaluated once.
class NormalizedExitCdf {
public:
    NormalizedExitCdf(const FourierBesselTable& table, double x_tilde);

    double raw(double t_tilde) const;         // unclamped truncated series
    double derivative(double t_tilde) const;  // d raw / d t~
    double value(double t_tilde) const;       // clamped to [0, 1]

private:
    std::vector<double> amplitude_;
    std::vector<double> rate_;
};

// Solves u~(t~, x / l) = uniform_u and returns 8 l t~ / sigma^2. The start
// x = 0 uses the limit of the series. Throws DomainError unless 0 <= x < l
// and 0 < uniform_u < 1; ConvergenceError if no root is bracketed.
// Close to x = l the truncated series does not start at 0 as t~ -> 0;
// draws below that floor return a time near zero.
double sample_exit_time(const FourierBesselTable& table, double x, double uniform_u,
                        double tol = 1e-10);

struct BandExit {
    double exit_time = 0.0;
    double exit_value = 0.0;  // always l
    double cdf_gap = 0.0;     // u+ - u- at (exit_time, entry); NaN when l >= lambda
};

// Holds the band tables for one (params, r, A, a) configuration.
class NearZeroSampler {
public:
    NearZeroSampler(const CirParams& params, double r, double band_A, double band_a,
                    int truncation_M = kDefaultTruncation, double exit_tol = 1e-10);

    double level() const noexcept { return level_; }
    double exit_sqrt_level() const noexcept { return exit_sqrt_level_; }
    const FourierBesselTable& upper_table() const noexcept { return upper_; }
    const std::optional<FourierBesselTable>& lower_table() const noexcept { return lower_; }

    // One uniform draw. Throws DomainError unless 0 <= v_bar_entry < l.
    BandExit excursion(double v_bar_entry, RngStream& rng) const;
    BandExit excursion_from_uniform(double v_bar_entry, double uniform_u) const;

private:
    double level_;
    double exit_sqrt_level_;
    double exit_tol_;
    FourierBesselTable upper_;
    std::optional<FourierBesselTable> lower_;
};

// Convenience wrapper building the tables on every call.
BandExit band_excursion(const CirParams& params, double r, double band_A, double band_a,
                        double v_bar_entry, RngStream& rng);

} // namespace cirsim::near_zero
