#pragma once

#include "cirsim/model.hpp"
#include "cirsim/near_zero.hpp"
#include "cirsim/rng.hpp"

#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Uniform simulation of sqrt(V) along random stopping times.
//
// Away from zero, each step draws the exit time theta of the driving Wiener
// increment from [-r, r] together with its exit side xi, follows the exact
// averaged ODE flow from the current skeleton value and adds the kick
// sigma r xi / 2. The step's contribution r (D1 + D2 / y^2) dt is added to the
// error ledger. When sqrt(V) falls below A r^a / 2 the path enters the band
// and the near-zero sampler provides the time at which V reaches (A r^a)^2.
namespace cirsim {

enum class Regime { Regular, BandEntry, BandExit, Final };

std::string_view regime_name(Regime regime) noexcept;

struct SkeletonPoint {
    double t = 0.0;
    double sqrt_v_bar = 0.0;
    Regime regime = Regime::Regular;
    std::optional<int> xi;        // exit side of the step ending here
    std::optional<double> theta;  // sampled exit time of the step or excursion ending here
    double cum_error_bound = 0.0; // ledger bound at this point
};

struct LedgerTerm {
    double coeff = 0.0;  // C_m = D1 + D2 / y_m^2
    double dt = 0.0;
};

class ErrorLedger {
public:
    ErrorLedger() = default;
    ErrorLedger(double r, double band_A, double band_a) : r_(r), band_A_(band_A), band_a_(band_a) {}

    // Adds r * coeff * dt to the running sum.
    void add_step(double coeff, double dt);
    // Zero-increment final step: sigma r.
    void add_final_extra(double extra);
    void record_band_excursion(double cdf_gap);

    double r() const noexcept { return r_; }
    double running_sum() const noexcept { return running_sum_; }
    double final_step_extra() const noexcept { return final_step_extra_; }
    double cumulative_bound() const noexcept { return running_sum_ + final_step_extra_; }
    const std::vector<LedgerTerm>& terms() const noexcept { return terms_; }

    double band_amplitude_A() const noexcept { return band_A_; }
    double band_exponent_a() const noexcept { return band_a_; }
    int band_excursions() const noexcept { return band_excursions_; }
    // Largest u+ - u- seen at a sampled exit; NaN if none was available.
    double max_exit_cdf_gap() const noexcept { return max_exit_cdf_gap_; }

private:
    double r_ = 0.0;
    double band_A_ = 1.0;
    double band_a_ = 1.0 / 3.0;
    double running_sum_ = 0.0;
    double final_step_extra_ = 0.0;
    std::vector<LedgerTerm> terms_;
    int band_excursions_ = 0;
    double max_exit_cdf_gap_ = std::numeric_limits<double>::quiet_NaN();
};

struct BandConfig {
    double amplitude_A = 1.0;
    double exponent_a = 1.0 / 3.0;
    int truncation_M = near_zero::kDefaultTruncation;
    double exit_tol = 1e-10;
};

// Throws ConfigError unless A > 0, 0 < a < 1/2, A r^a / 2 > 3 sigma r / 2
// and, when alpha > 0, r < (2/3) sqrt(2 alpha / (k sigma^2)).
void validate_band_config(const CirParams& params, double r, double band_A, double band_a);

enum class BandDecision { Continue, EnterBand };

// EnterBand iff sqrt_v_bar < A r^a / 2. Validates the configuration first.
BandDecision check_band_entry(const CirParams& params, double r, double band_A, double band_a,
                              double sqrt_v_bar);

// Deterministic core of a regular step with the draws supplied by the
// caller. The step is final when current.t + theta >= horizon_end; the
// endpoint increment is then zero and sigma r goes to the ledger.
// Throws BandRequired if current.sqrt_v_bar < 3 sigma r / 2.
SkeletonPoint advance_regular(const CirParams& params, double r, double horizon_end,
                              const SkeletonPoint& current, double theta, int xi,
                              ErrorLedger& ledger);

// Draws theta then xi from rng and calls advance_regular.
SkeletonPoint step_regular(const CirParams& params, double r, double horizon_end,
                           const SkeletonPoint& current, RngStream& rng, ErrorLedger& ledger);

struct PathSkeleton {
    CirParams params;
    double r = 0.0;
    double t0 = 0.0;
    BandConfig band;
    std::vector<SkeletonPoint> points;
    ErrorLedger ledger;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::string generator_id;

    double horizon_end() const noexcept { return t0 + params.horizon(); }
    double band_top() const noexcept;  // A r^a
};

// Reusable simulator for one (params, r, band) configuration. The band
// tables are built on the first band entry and then shared by all threads.
class PathSimulator {
public:
    PathSimulator(const CirParams& params, double r, BandConfig band = {});

    // Throws ConfigError if sqrt(v0) < sigma r, NearZeroUnavailable if the
    // band is entered while alpha == 0.
    PathSkeleton simulate(double v0, double t0, RngStream& rng) const;

    // Final sqrt(V-bar) only, without keeping the skeleton.
    double simulate_terminal(double v0, double t0, RngStream& rng) const;

    const CirParams& params() const noexcept { return params_; }
    double r() const noexcept { return r_; }
    const BandConfig& band() const noexcept { return band_; }
    bool band_available() const noexcept { return params_.near_zero_capable(); }
    // Builds the tables on first use. Throws NearZeroUnavailable when alpha == 0.
    const near_zero::NearZeroSampler& sampler() const;

private:
    template <typename Sink>
    void run(double v0, double t0, RngStream& rng, ErrorLedger& ledger, Sink&& sink) const;

    CirParams params_;
    double r_;
    BandConfig band_;
    double band_threshold_;  // A r^a / 2
    double band_top_;        // A r^a
    struct LazySampler {
        std::once_flag once;
        std::optional<near_zero::NearZeroSampler> sampler;
    };
    std::shared_ptr<LazySampler> lazy_;
};

PathSkeleton simulate_path(const CirParams& params, double v0, double r, double band_A,
                           double band_a, RngStream& rng, double t0 = 0.0);

struct DenseValue {
    double sqrt_v = 0.0;
    double error_tag = 0.0;
    bool in_band = false;
};

// Continuous approximation between skeleton points: ODE flow plus the chord
// of the recorded increment on regular segments, the straight line to the
// exit point inside the band. Throws DomainError outside [t0, t0 + T].
DenseValue dense_eval(const PathSkeleton& path, double t);

struct ErrorReport {
    double cumulative_bound = 0.0;   // r sum C_m dt_m + final step extra
    double outside_band_sum = 0.0;   // r sum C_m dt_m
    double final_step_extra = 0.0;
    int band_excursions = 0;
    double inside_band_tag = 0.0;    // A r^a when the band was visited
    double outside_band_order = 0.0; // r^{1 - 2a}
    double inside_band_order = 0.0;  // r^a
};

ErrorReport error_bound(const PathSkeleton& path);

// Re-checks the skeleton invariants and recomputes the ledger from the
// points. Returns one message per violation.
std::vector<std::string> lint_skeleton(const PathSkeleton& path);

} // namespace cirsim
