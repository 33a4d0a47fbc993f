#include "cirsim/bessel.hpp"
#include "cirsim/errors.hpp"
#include "oracles.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace cirsim;
using namespace cirsim::bessel;

TEST(BesselJ, HalfOrderClosedForm)
{
    for (double x : {1.0, std::numbers::pi, 5.0}) {
        EXPECT_NEAR(bessel_j(0.5, x), std::sqrt(2.0 / (std::numbers::pi * x)) * std::sin(x), 1e-15) << x;
    }
    EXPECT_EQ(bessel_j(0.0, 0.0), 1.0);
}

TEST(BesselJ, IntegralRepresentation)
{
    EXPECT_NEAR(bessel_j(0.35, 7.3), oracle::bessel_j_integral(0.35, 7.3), 1e-13);
    EXPECT_NEAR(bessel_j(1.7, 30.0), oracle::bessel_j_integral(1.7, 30.0), 1e-13);
}

TEST(BesselJ, AgreesWithBoostOnGrid)
{
    for (double nu : {-0.45, -0.2, 0.0, 0.35, 0.5, 1.35, 3.0, 9.5}) {
        for (double x = 0.05; x < 120.0; x *= 1.17) {
            EXPECT_NEAR(bessel_j(nu, x), boost::math::cyl_bessel_j(nu, x), 2e-15) << nu << ' ' << x;
        }
    }
}

TEST(BesselJ, OverPowerAndDerivative)
{
    const double nu = 0.35;
    EXPECT_NEAR(bessel_j_over_power(nu, 0.0), 1.0 / (std::pow(2.0, nu) * std::tgamma(nu + 1.0)), 1e-15);
    EXPECT_NEAR(bessel_j_over_power(-0.3, 0.0), 1.0 / (std::pow(2.0, -0.3) * std::tgamma(0.7)), 1e-15);
    EXPECT_NEAR(bessel_j_over_power(nu, 2.5), bessel_j(nu, 2.5) / std::pow(2.5, nu), 1e-15);
    const double h = 1e-5;
    for (double x : {0.7, 3.2, 11.0, 25.0}) {
        const double fd = (bessel_j(nu, x + h) - bessel_j(nu, x - h)) / (2 * h);
        EXPECT_NEAR(bessel_j_prime(nu, x), fd, 1e-9);
    }
    EXPECT_THROW(bessel_j(-0.3, 0.0), DomainError);
    EXPECT_THROW(bessel_j(0.3, -1.0), DomainError);
}

TEST(BesselZeros, HalfOrderMultiplesOfPi)
{
    const auto zeros = bessel_zeros(0.5, 5);
    for (int m = 1; m <= 5; ++m) {
        EXPECT_NEAR(zeros[m - 1], m * std::numbers::pi, 1e-13);
        EXPECT_EQ(bessel_zero(0.5, m), zeros[m - 1]);
    }
}

TEST(BesselZeros, FirstZeroByBisection)
{
    // Bracket from a coarse scan of Boost's J_0.35, then bisect.
    auto f = [](double x) { return boost::math::cyl_bessel_j(0.35, x); };
    double lo = 0.1;
    while (f(lo + 0.1) > 0.0) {
        lo += 0.1;
    }
    double hi = lo + 0.1;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    EXPECT_NEAR(bessel_zero(0.35, 1), 0.5 * (lo + hi), 1e-13);
}

TEST(BesselZeros, IncreasingInterlacedAndResidual)
{
    for (double nu : {-0.45, -0.1, 0.35, 0.5, 2.0}) {
        const auto zeros = bessel_zeros(nu, 30);
        const auto next = bessel_zeros(nu + 1.0, 30);
        for (int m = 0; m < 30; ++m) {
            EXPECT_LT(std::abs(bessel_j(nu, zeros[m])), 1e-14);
            EXPECT_NEAR(zeros[m], boost::math::cyl_bessel_j_zero(nu, m + 1), 1e-12 * zeros[m]);
            if (m > 0) {
                EXPECT_GT(zeros[m], zeros[m - 1]);
            }
            if (m + 1 < 30) {
                EXPECT_LT(zeros[m], next[m]);
                EXPECT_LT(next[m], zeros[m + 1]);
            }
        }
    }
}

TEST(BesselZeros, McMahonIsCloseForLargeIndex)
{
    EXPECT_NEAR(mcmahon_zero(0.35, 20), bessel_zero(0.35, 20), 1e-6);
}
