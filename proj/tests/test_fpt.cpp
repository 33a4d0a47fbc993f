#include "cirsim/errors.hpp"
#include "cirsim/fpt.hpp"
#include "cirsim/transition.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace cirsim;
using namespace cirsim::fpt;

namespace {

double eigen_density(double t)
{
    const double pi = std::numbers::pi;
    double sum = 0.0;
    for (int n = 0; n < 30; ++n) {
        const double a = 2 * n + 1;
        sum += (n % 2 == 0 ? 1.0 : -1.0) * a * std::exp(-a * a * pi * pi * t / 8);
    }
    return pi / 2 * sum;
}

double quadrature_cdf(double t)
{
    return oracle::integrate([](double s) { return s <= 0.0 ? 0.0 : oracle::fpt_density_images(s); }, 0.0, t);
}

} // namespace

TEST(FptDensity, MatchesFullSeries)
{
    for (double t : {0.02, 0.1, 0.3, 0.6, kBranchPoint, 0.7, 1.0, 2.0, 5.0}) {
        EXPECT_NEAR(fpt_density(t), oracle::fpt_density_images(t), 1e-15) << t;
        EXPECT_NEAR(fpt_density(t), eigen_density(t), 1e-15) << t;
    }
    EXPECT_LE(kDensityAccuracy, 2.13e-16);
    EXPECT_THROW(fpt_density(0.0), DomainError);
}

TEST(FptDensity, SmallTimeDecayAndContinuity)
{
    EXPECT_LT(fpt_density(0.01), 1e-18);
    EXPECT_GT(fpt_density(0.01), 0.0);
    EXPECT_LT(std::abs(oracle::fpt_density_images(kBranchPoint) - eigen_density(kBranchPoint)), 1e-12);
    const double eps = 1e-9;
    EXPECT_LT(std::abs(fpt_density(kBranchPoint - eps) - fpt_density(kBranchPoint + eps)), 1e-8);
}

TEST(FptCdf, AgreesWithQuadrature)
{
    EXPECT_EQ(fpt_cdf(0.0), 0.0);
    EXPECT_LE(kCdfAccuracy, 7.04e-18);
    for (double t : {0.2, kBranchPoint, 1.0, 3.0}) {
        EXPECT_LT(std::abs(fpt_cdf(t) - quadrature_cdf(t)), 1e-10) << t;
    }
    EXPECT_NEAR(fpt_cdf(40.0), 1.0, 1e-15);
    for (double t : {0.05, 0.5, 1.5, 10.0}) {
        EXPECT_NEAR(fpt_cdf(t), oracle::fpt_cdf_images(t), 1e-13) << t;
    }
    EXPECT_THROW(fpt_cdf(-1.0), DomainError);
}

TEST(FptInverse, RoundTripAndMonotone)
{
    for (double t : {0.3, 1.0, 2.5}) {
        EXPECT_NEAR(fpt_inverse(fpt_cdf(t)), t, 1e-9);
    }
    double previous = 0.0;
    for (int i = 1; i < 100; ++i) {
        const double tau = fpt_inverse(i / 100.0);
        EXPECT_GT(tau, previous);
        previous = tau;
    }
    EXPECT_THROW(fpt_inverse(0.0), DomainError);
    EXPECT_THROW(fpt_inverse(1.0), DomainError);
}

TEST(FptInverse, MedianByBisectionOnQuadrature)
{
    double lo = 0.1;
    double hi = 3.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (quadrature_cdf(mid) < 0.5 ? lo : hi) = mid;
    }
    EXPECT_NEAR(fpt_inverse(0.5), 0.5 * (lo + hi), 1e-9);
}

TEST(SampleTheta, ScalingInRadius)
{
    RngStream a(5, 0);
    RngStream b(5, 0);
    for (int i = 0; i < 100; ++i) {
        EXPECT_NEAR(sample_theta(b, 0.2) / sample_theta(a, 0.1), 4.0, 1e-12);
    }
}

TEST(SampleTheta, MeanAndKs)
{
    RngStream rng(2024, 0);
    const int n = 100000;
    const double r = 0.3;
    std::vector<double> tau(n);
    double sum = 0.0;
    for (auto& x : tau) {
        x = sample_theta(rng, r);
        sum += x;
    }
    const double mean = sum / n;
    double var = 0.0;
    for (double x : tau) {
        var += (x - mean) * (x - mean);
    }
    const double se = std::sqrt(var / (n - 1) / n);
    EXPECT_LT(std::abs(mean - r * r), 3 * se);
    for (auto& x : tau) {
        x /= r * r;
    }
    EXPECT_LT(ks_statistic(tau, [](double t) { return oracle::fpt_cdf_images(t); }), 0.01);
}

TEST(SampleSign, BalancedDeterministicIndependent)
{
    RngStream rng(99, 3);
    const int n = 100000;
    std::vector<double> theta(n);
    std::vector<double> sign(n);
    int plus = 0;
    for (int i = 0; i < n; ++i) {
        theta[i] = sample_theta(rng, 1.0);
        sign[i] = sample_sign(rng);
        plus += sign[i] > 0;
    }
    EXPECT_GE(plus / double(n), 0.49);
    EXPECT_LE(plus / double(n), 0.51);

    double mt = 0.0;
    double ms = 0.0;
    for (int i = 0; i < n; ++i) {
        mt += theta[i];
        ms += sign[i];
    }
    mt /= n;
    ms /= n;
    double cov = 0.0;
    double vt = 0.0;
    double vs = 0.0;
    for (int i = 0; i < n; ++i) {
        cov += (theta[i] - mt) * (sign[i] - ms);
        vt += (theta[i] - mt) * (theta[i] - mt);
        vs += (sign[i] - ms) * (sign[i] - ms);
    }
    EXPECT_LT(std::abs(cov / std::sqrt(vt * vs)), 0.02);

    RngStream x(99, 3);
    RngStream y(99, 3);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(sample_sign(x), sample_sign(y));
    }
}

TEST(Rng, StreamsAreReproducibleAndDistinct)
{
    RngStream a(1, 0);
    RngStream b(1, 0);
    RngStream c(1, 1);
    int same = 0;
    for (int i = 0; i < 100; ++i) {
        const double ua = a.uniform();
        EXPECT_EQ(ua, b.uniform());
        EXPECT_GT(ua, 0.0);
        EXPECT_LT(ua, 1.0);
        same += ua == c.uniform();
    }
    EXPECT_EQ(same, 0);
}
