#pragma once

#include "cirsim/model.hpp"

#include <functional>
#include <vector>

namespace cirsim {

// Exact law of V(t0 + dt) given V(t0) = v0: a scaled noncentral chi-square.
struct TransitionLaw {
    double scale = 0.0;          // c = sigma^2 (1 - e^{-k dt}) / (4k)
    double dof = 0.0;            // 4 k lambda / sigma^2
    double noncentrality = 0.0;  // v0 e^{-k dt} / c
};

TransitionLaw cir_transition_law(const CirParams& params, double v0, double dt);
double cir_transition_cdf(const CirParams& params, double v0, double dt, double v);
double cir_transition_mean(const CirParams& params, double v0, double dt);

// Kolmogorov-Smirnov sup distance of a sample against a continuous CDF.
// The sample is sorted in place.
double ks_statistic(std::vector<double>& sample, const std::function<double(double)>& cdf);

// Two-sample sup distance. Both samples are sorted in place.
double ks_two_sample(std::vector<double>& a, std::vector<double>& b);

} // namespace cirsim
