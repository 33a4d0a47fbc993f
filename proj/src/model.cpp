#include "cirsim/model.hpp"

#include "cirsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cirsim {

namespace {

void require_positive(double value, const char* name)
{
    if (!std::isfinite(value) || !(value > 0.0)) {
        throw NonPositiveParameter(std::string(name) + " must be finite and positive, got " +
                                   std::to_string(value));
    }
}

} // namespace

CirParams CirParams::validate(double k, double lambda, double sigma, double horizon)
{
    require_positive(k, "k");
    require_positive(lambda, "lambda");
    require_positive(sigma, "sigma");
    require_positive(horizon, "horizon_T");

    const double alpha = (4.0 * k * lambda - sigma * sigma) / 8.0;
    if (alpha < 0.0) {
        throw NegativeAlpha("alpha = (4 k lambda - sigma^2) / 8 = " + std::to_string(alpha) +
                            " < 0; the scheme requires 4 k lambda >= sigma^2");
    }

    CirParams p;
    p.k_ = k;
    p.lambda_ = lambda;
    p.sigma_ = sigma;
    p.horizon_ = horizon;
    p.alpha_ = alpha;
    p.gamma_ = 0.5 - k * lambda / (sigma * sigma);
    p.d1_ = sigma * k / 2.0;
    p.d2_ = (4.0 * alpha * sigma / 3.0) * std::exp(k * horizon / 2.0);
    p.fixed_point_ = std::sqrt(2.0 * alpha / k);
    return p;
}

double ode_exact(const CirParams& params, OdeState state, double t)
{
    if (!(t >= state.t0)) {
        throw DomainError("ode_exact: t precedes the segment start");
    }
    if (!(state.y0 > 0.0)) {
        throw DomainError("ode_exact: start value must be positive");
    }
    const double k = params.k();
    const double decay = std::exp(-k * (t - state.t0));
    const double growth = -std::expm1(-k * (t - state.t0));
    return std::sqrt(state.y0 * state.y0 * decay + (2.0 * params.alpha() / k) * growth);
}

Envelope envelopes(const CirParams& params, OdeState state, double r, double t)
{
    if (!(t >= state.t0)) {
        throw DomainError("envelopes: t precedes the segment start");
    }
    if (!(r >= 0.0)) {
        throw DomainError("envelopes: r must be non-negative");
    }
    const double half_kick = 0.5 * params.sigma() * r;
    if (!(state.y0 >= 2.0 * half_kick) || !(state.y0 > 0.0)) {
        throw DomainError("envelopes: start value below sigma * r");
    }
    const double k = params.k();
    const double decay = std::exp(-k * (t - state.t0));
    const double drift = (2.0 * params.alpha() / k) * -std::expm1(-k * (t - state.t0));
    const double hi = state.y0 + half_kick;
    const double lo = state.y0 - half_kick;
    return {std::sqrt(hi * hi * decay + drift) - half_kick,
            std::sqrt(lo * lo * decay + drift) + half_kick};
}

double step_error_coeff(const CirParams& params, double y)
{
    if (!(y > 0.0)) {
        throw DomainError("step_error_coeff: y must be positive");
    }
    return params.d1() + params.d2() / (y * y);
}

double convergence_radius(const CirParams& params, double eta)
{
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw DomainError("convergence_radius: eta must be positive");
    }
    const double by_noise = eta / params.sigma();
    const double by_drift = eta / (step_error_coeff(params, eta) * params.horizon());
    return std::min(by_noise, by_drift);
}

} // namespace cirsim
