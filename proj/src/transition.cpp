#include "cirsim/transition.hpp"

#include "cirsim/errors.hpp"

#include <boost/math/distributions/non_central_chi_squared.hpp>

#include <algorithm>
#include <cmath>

namespace cirsim {

TransitionLaw cir_transition_law(const CirParams& params, double v0, double dt)
{
    if (!(dt > 0.0) || !(v0 >= 0.0)) {
        throw DomainError("transition law needs dt > 0 and v0 >= 0");
    }
    const double k = params.k();
    const double sigma = params.sigma();
    TransitionLaw law;
    law.scale = -sigma * sigma * std::expm1(-k * dt) / (4.0 * k);
    law.dof = 4.0 * k * params.lambda() / (sigma * sigma);
    law.noncentrality = v0 * std::exp(-k * dt) / law.scale;
    return law;
}

double cir_transition_cdf(const CirParams& params, double v0, double dt, double v)
{
    if (v <= 0.0) {
        return 0.0;
    }
    const auto law = cir_transition_law(params, v0, dt);
    const boost::math::non_central_chi_squared dist(law.dof, law.noncentrality);
    return boost::math::cdf(dist, v / law.scale);
}

double cir_transition_mean(const CirParams& params, double v0, double dt)
{
    const double decay = std::exp(-params.k() * dt);
    return v0 * decay + params.lambda() * (1.0 - decay);
}

double ks_statistic(std::vector<double>& sample, const std::function<double(double)>& cdf)
{
    if (sample.empty()) {
        throw DomainError("ks_statistic: empty sample");
    }
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        worst = std::max({worst, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return worst;
}

double ks_two_sample(std::vector<double>& a, std::vector<double>& b)
{
    if (a.empty() || b.empty()) {
        throw DomainError("ks_two_sample: empty sample");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double worst = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) {
            ++i;
        }
        while (j < b.size() && b[j] <= x) {
            ++j;
        }
        worst = std::max(worst, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return worst;
}

} // namespace cirsim
