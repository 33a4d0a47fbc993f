#include "cirsim/stepper.hpp"

#include "cirsim/errors.hpp"
#include "cirsim/fpt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cirsim {

std::string_view regime_name(Regime regime) noexcept
{
    switch (regime) {
    case Regime::Regular:
        return "regular";
    case Regime::BandEntry:
        return "band_entry";
    case Regime::BandExit:
        return "band_exit";
    case Regime::Final:
        return "final";
    }
    return "unknown";
}

void ErrorLedger::add_step(double coeff, double dt)
{
    terms_.push_back({coeff, dt});
    running_sum_ += r_ * coeff * dt;
}

void ErrorLedger::add_final_extra(double extra)
{
    final_step_extra_ += extra;
}

void ErrorLedger::record_band_excursion(double cdf_gap)
{
    ++band_excursions_;
    if (!std::isnan(cdf_gap) && (std::isnan(max_exit_cdf_gap_) || cdf_gap > max_exit_cdf_gap_)) {
        max_exit_cdf_gap_ = cdf_gap;
    }
}

void validate_band_config(const CirParams& params, double r, double band_A, double band_a)
{
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw ConfigError("r must be positive");
    }
    if (!(band_A > 0.0) || !std::isfinite(band_A)) {
        throw ConfigError("band amplitude A must be positive");
    }
    if (!(band_a > 0.0 && band_a < 0.5)) {
        throw ConfigError("band exponent a must lie in (0, 1/2)");
    }
    const double sigma = params.sigma();
    const double threshold = 0.5 * band_A * std::pow(r, band_a);
    if (!(threshold > 1.5 * sigma * r)) {
        std::ostringstream msg;
        msg << "band threshold A r^a / 2 = " << threshold << " must exceed 3 sigma r / 2 = "
            << 1.5 * sigma * r << "; decrease r or increase A";
        throw ConfigError(msg.str());
    }
    if (params.alpha() > 0.0) {
        const double r_max = (2.0 / 3.0) * std::sqrt(2.0 * params.alpha() / (params.k() * sigma * sigma));
        if (!(r < r_max)) {
            std::ostringstream msg;
            msg << "r = " << r << " must be below (2/3) sqrt(2 alpha / (k sigma^2)) = " << r_max;
            throw ConfigError(msg.str());
        }
    }
}

BandDecision check_band_entry(const CirParams& params, double r, double band_A, double band_a,
                              double sqrt_v_bar)
{
    validate_band_config(params, r, band_A, band_a);
    return sqrt_v_bar < 0.5 * band_A * std::pow(r, band_a) ? BandDecision::EnterBand
                                                            : BandDecision::Continue;
}

SkeletonPoint advance_regular(const CirParams& params, double r, double horizon_end,
                              const SkeletonPoint& current, double theta, int xi,
                              ErrorLedger& ledger)
{
    const double sigma = params.sigma();
    if (current.sqrt_v_bar < 1.5 * sigma * r) {
        throw BandRequired("regular step needs sqrt(V) >= 3 sigma r / 2");
    }
    if (!(current.t < horizon_end)) {
        throw DomainError("regular step requested at or beyond the horizon");
    }
    if (!(theta > 0.0)) {
        throw DomainError("regular step needs a positive exit time");
    }
    if (xi != 1 && xi != -1) {
        throw DomainError("exit side must be +1 or -1");
    }

    SkeletonPoint next;
    const bool is_final = current.t + theta >= horizon_end;
    next.t = is_final ? horizon_end : current.t + theta;
    next.theta = theta;

    const double y = ode_exact(params, {current.t, current.sqrt_v_bar}, next.t);
    ledger.add_step(step_error_coeff(params, current.sqrt_v_bar), next.t - current.t);
    if (is_final) {
        next.sqrt_v_bar = ds_reconstruct(y, 0.0, sigma);
        next.regime = Regime::Final;
        ledger.add_final_extra(sigma * r);
    } else {
        next.sqrt_v_bar = ds_reconstruct(y, r * xi, sigma);
        next.regime = Regime::Regular;
        next.xi = xi;
    }
    next.cum_error_bound = ledger.cumulative_bound();
    return next;
}

SkeletonPoint step_regular(const CirParams& params, double r, double horizon_end,
                           const SkeletonPoint& current, RngStream& rng, ErrorLedger& ledger)
{
    const double theta = fpt::sample_theta(rng, r);
    const int xi = fpt::sample_sign(rng);
    return advance_regular(params, r, horizon_end, current, theta, xi, ledger);
}

double PathSkeleton::band_top() const noexcept
{
    return band.amplitude_A * std::pow(r, band.exponent_a);
}

PathSimulator::PathSimulator(const CirParams& params, double r, BandConfig band)
    : params_(params), r_(r), band_(band), band_threshold_(0.0), band_top_(0.0),
      lazy_(std::make_shared<LazySampler>())
{
    validate_band_config(params, r, band.amplitude_A, band.exponent_a);
    band_top_ = band.amplitude_A * std::pow(r, band.exponent_a);
    band_threshold_ = 0.5 * band_top_;
}

const near_zero::NearZeroSampler& PathSimulator::sampler() const
{
    if (!params_.near_zero_capable()) {
        throw NearZeroUnavailable("path entered the near-zero band but alpha == 0");
    }
    // A throwing build leaves the flag unset, so the next caller retries.
    std::call_once(lazy_->once, [this] {
        lazy_->sampler.emplace(params_, r_, band_.amplitude_A, band_.exponent_a, band_.truncation_M,
                               band_.exit_tol);
    });
    return *lazy_->sampler;
}

template <typename Sink>
void PathSimulator::run(double v0, double t0, RngStream& rng, ErrorLedger& ledger, Sink&& sink) const
{
    if (!(v0 >= 0.0) || !std::isfinite(v0) || !std::isfinite(t0)) {
        throw ConfigError("v0 must be finite and non-negative");
    }
    const double sigma = params_.sigma();
    const double end = t0 + params_.horizon();

    SkeletonPoint current;
    current.t = t0;
    current.sqrt_v_bar = std::sqrt(v0);
    if (current.sqrt_v_bar < sigma * r_) {
        throw ConfigError("sqrt(v0) must be at least sigma * r");
    }
    current.regime = current.sqrt_v_bar < band_threshold_ ? Regime::BandEntry : Regime::Regular;
    sink(current);

    while (current.t < end) {
        SkeletonPoint next;
        if (current.regime == Regime::BandEntry) {
            const auto exit = sampler().excursion(current.sqrt_v_bar * current.sqrt_v_bar, rng);
            ledger.record_band_excursion(exit.cdf_gap);
            next.theta = exit.exit_time;
            next.cum_error_bound = ledger.cumulative_bound();
            if (current.t + exit.exit_time < end) {
                next.t = current.t + exit.exit_time;
                next.sqrt_v_bar = band_top_;
                next.regime = Regime::BandExit;
            } else {
                // Excursion cut at the horizon; report the line to the exit point.
                const double frac = (end - current.t) / exit.exit_time;
                next.t = end;
                next.sqrt_v_bar = current.sqrt_v_bar + (band_top_ - current.sqrt_v_bar) * frac;
                next.regime = Regime::Final;
            }
        } else {
            next = step_regular(params_, r_, end, current, rng, ledger);
            if (next.regime == Regime::Regular && next.sqrt_v_bar < band_threshold_) {
                next.regime = Regime::BandEntry;
            }
        }
        sink(next);
        current = next;
    }
}

PathSkeleton PathSimulator::simulate(double v0, double t0, RngStream& rng) const
{
    PathSkeleton path{params_, r_, t0, band_, {}, ErrorLedger(r_, band_.amplitude_A, band_.exponent_a),
                      rng.seed(), rng.stream_id(), std::string(RngStream::kGeneratorId)};
    run(v0, t0, rng, path.ledger, [&path](const SkeletonPoint& p) { path.points.push_back(p); });
    return path;
}

double PathSimulator::simulate_terminal(double v0, double t0, RngStream& rng) const
{
    ErrorLedger ledger(r_, band_.amplitude_A, band_.exponent_a);
    double last = 0.0;
    run(v0, t0, rng, ledger, [&last](const SkeletonPoint& p) { last = p.sqrt_v_bar; });
    return last;
}

PathSkeleton simulate_path(const CirParams& params, double v0, double r, double band_A,
                           double band_a, RngStream& rng, double t0)
{
    BandConfig band;
    band.amplitude_A = band_A;
    band.exponent_a = band_a;
    return PathSimulator(params, r, band).simulate(v0, t0, rng);
}

DenseValue dense_eval(const PathSkeleton& path, double t)
{
    const auto& pts = path.points;
    if (pts.empty()) {
        throw DomainError("dense_eval: empty skeleton");
    }
    if (!(t >= pts.front().t && t <= pts.back().t)) {
        throw DomainError("dense_eval: t outside the simulated interval");
    }
    const auto after = std::upper_bound(pts.begin(), pts.end(), t,
                                        [](double value, const SkeletonPoint& p) { return value < p.t; });
    const auto& start = *(after - 1);
    if (start.t == t || after == pts.end()) {
        return {start.sqrt_v_bar, start.cum_error_bound, false};
    }
    const auto& stop = *after;
    const double frac = (t - start.t) / (stop.t - start.t);

    if (start.regime == Regime::BandEntry) {
        return {start.sqrt_v_bar + (stop.sqrt_v_bar - start.sqrt_v_bar) * frac, path.band_top(), true};
    }
    const double sigma = path.params.sigma();
    const double y = ode_exact(path.params, {start.t, start.sqrt_v_bar}, t);
    const double increment = stop.xi ? path.r * *stop.xi : 0.0;
    const double tag = stop.regime == Regime::Final ? stop.cum_error_bound
                                                    : stop.cum_error_bound + sigma * path.r;
    return {ds_reconstruct(y, increment * frac, sigma), tag, false};
}

ErrorReport error_bound(const PathSkeleton& path)
{
    ErrorReport report;
    report.cumulative_bound = path.ledger.cumulative_bound();
    report.outside_band_sum = path.ledger.running_sum();
    report.final_step_extra = path.ledger.final_step_extra();
    report.band_excursions = path.ledger.band_excursions();
    if (report.band_excursions > 0) {
        report.inside_band_tag = path.band_top();
    }
    report.outside_band_order = std::pow(path.r, 1.0 - 2.0 * path.band.exponent_a);
    report.inside_band_order = std::pow(path.r, path.band.exponent_a);
    return report;
}

std::vector<std::string> lint_skeleton(const PathSkeleton& path)
{
    std::vector<std::string> problems;
    auto report = [&problems](std::size_t i, const std::string& what) {
        problems.push_back("point " + std::to_string(i) + ": " + what);
    };
    const auto& pts = path.points;
    if (pts.empty()) {
        problems.emplace_back("skeleton has no points");
        return problems;
    }
    if (pts.front().t != path.t0) {
        report(0, "first point is not at t0");
    }
    if (pts.back().t != path.horizon_end()) {
        report(pts.size() - 1, "last point is not at the horizon");
    }
    if (pts.back().regime != Regime::Final) {
        report(pts.size() - 1, "last point is not tagged final");
    }

    const double sigma = path.params.sigma();
    const double r = path.r;
    double running = 0.0;
    std::size_t regular_segments = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        if (!std::isfinite(p.sqrt_v_bar) || p.sqrt_v_bar < 0.0) {
            report(i, "negative or non-finite sqrt_v_bar");
        }
        if (p.regime == Regime::Regular && p.sqrt_v_bar < sigma * r * (1.0 - 1e-12)) {
            report(i, "regular point below sigma * r");
        }
        if (i == 0) {
            continue;
        }
        const auto& prev = pts[i - 1];
        if (!(p.t > prev.t)) {
            report(i, "time not increasing");
        }
        if (prev.regime == Regime::Final) {
            report(i, "point after a final point");
        }
        if (prev.regime == Regime::BandEntry && p.regime != Regime::BandExit &&
            p.regime != Regime::Final) {
            report(i, "band entry not followed by an exit");
        }
        if (p.regime == Regime::BandExit && prev.regime != Regime::BandEntry) {
            report(i, "band exit without entry");
        }
        double expected = 0.0;
        if (prev.regime == Regime::BandEntry) {
            expected = running;
        } else {
            ++regular_segments;
            running += r * step_error_coeff(path.params, prev.sqrt_v_bar) * (p.t - prev.t);
            expected = running + (p.regime == Regime::Final ? sigma * r : 0.0);
        }
        if (std::abs(expected - p.cum_error_bound) > 1e-12 * std::max(1.0, expected)) {
            std::ostringstream msg;
            msg << "ledger bound " << p.cum_error_bound << " differs from recomputed " << expected;
            report(i, msg.str());
        }
    }
    if (regular_segments != path.ledger.terms().size()) {
        problems.emplace_back("ledger term count does not match regular segments");
    }
    if (path.ledger.cumulative_bound() != pts.back().cum_error_bound) {
        problems.emplace_back("ledger total differs from the last point");
    }
    return problems;
}

} // namespace cirsim
