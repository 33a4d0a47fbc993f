#pragma once

// CIR model constants, the averaged ODE flow and the Doss-Sussmann
// reconstruction of sqrt(V).
//
//   dV = k (lambda - V) dt + sigma sqrt(V) dw
//   U = sqrt(V):  dU = (alpha / U - k U / 2) dt + (sigma / 2) dw
//
// Everything in this header is pure; CirParams is immutable once built.

namespace cirsim {

class CirParams {
public:
    // Throws NonPositiveParameter for non-finite or non-positive inputs and
    // NegativeAlpha when 4 k lambda < sigma^2.
    static CirParams validate(double k, double lambda, double sigma, double horizon);

    double k() const noexcept { return k_; }
    double lambda() const noexcept { return lambda_; }
    double sigma() const noexcept { return sigma_; }
    double horizon() const noexcept { return horizon_; }

    /// (4 k lambda - sigma^2) / 8, the drift constant of the Lamperti SDE.
    double alpha() const noexcept { return alpha_; }
    /// 1/2 - k lambda / sigma^2; the Bessel order of the band problem is -2 gamma.
    double gamma() const noexcept { return gamma_; }
    /// sigma k / 2.
    double d1() const noexcept { return d1_; }
    /// (4 alpha sigma / 3) exp(k T / 2), evaluated at the full horizon.
    double d2() const noexcept { return d2_; }

    /// sqrt(2 alpha / k), the stationary point of the averaged ODE.
    double ode_fixed_point() const noexcept { return fixed_point_; }

    bool near_zero_capable() const noexcept { return alpha_ > 0.0; }

private:
    CirParams() = default;

    double k_ = 0.0;
    double lambda_ = 0.0;
    double sigma_ = 0.0;
    double horizon_ = 0.0;
    double alpha_ = 0.0;
    double gamma_ = 0.0;
    double d1_ = 0.0;
    double d2_ = 0.0;
    double fixed_point_ = 0.0;
};

inline CirParams validate_params(double k, double lambda, double sigma, double horizon)
{
    return CirParams::validate(k, lambda, sigma, horizon);
}

// Start of an ODE segment in the sqrt(V) coordinate.
struct OdeState {
    double t0 = 0.0;
    double y0 = 0.0;
};

// Exact solution of dy/dt = alpha / y - (k / 2) y started at state.
// Throws DomainError for t < t0 or y0 <= 0.
double ode_exact(const CirParams& params, OdeState state, double t);

// sqrt(V) = y + (sigma / 2) * w_increment. Negative results are returned
// unchanged so that the caller can detect a regime violation.
inline double ds_reconstruct(double y, double w_increment, double sigma) noexcept
{
    return y + 0.5 * sigma * w_increment;
}

struct Envelope {
    double lower = 0.0;
    double upper = 0.0;
};

// Comparison solutions bracketing every solution of
//   dy/dt = alpha / (y + sigma phi / 2) - (k / 2)(y + sigma phi / 2)
// with |phi| <= r and the same start. Requires y0 >= sigma r.
Envelope envelopes(const CirParams& params, OdeState state, double r, double t);

// One-step error coefficient C = D1 + D2 / y^2.
double step_error_coeff(const CirParams& params, double y);

// Radius below which every skeleton value of a trajectory with
// min sqrt(V) = 2 eta stays above eta:
//   min(eta / sigma, eta / ((D1 + D2 / eta^2) T)).
double convergence_radius(const CirParams& params, double eta);

} // namespace cirsim
