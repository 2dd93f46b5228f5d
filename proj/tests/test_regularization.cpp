#include "mfglab/errors.hpp"
#include "mfglab/regularization.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mfglab;

namespace {

RegularizationParams params(double sigma, double q)
{
    RegularizationParams p;
    p.sigma = sigma;
    p.q = q;
    return p;
}

} // namespace

TEST(BetaSigma, Examples)
{
    EXPECT_EQ(beta_sigma(0.5, params(0.4, 3.0)), 0.0);
    EXPECT_DOUBLE_EQ(beta_sigma(0.1, params(0.4, 2.0)), -100.0);
    EXPECT_DOUBLE_EQ(beta_sigma(0.2, params(0.4, 2.0)), -25.0);
}

TEST(BetaSigma, ContinuousAtBothJoins)
{
    const auto p = params(0.4, 2.0);
    for (double eps : {1e-3, 1e-5, 1e-7}) {
        EXPECT_NEAR(beta_sigma(0.2 + eps, p), -25.0, 1e3 * eps);
        EXPECT_NEAR(beta_sigma(0.4 - eps, p), 0.0, 1e3 * eps);
    }
    EXPECT_EQ(beta_sigma(0.4, p), 0.0);
}

TEST(BetaSigma, NondecreasingWithConsistentDerivative)
{
    const auto p = params(0.3, 2.5);
    double previous = beta_sigma(0.01, p);
    for (int i = 1; i <= 2000; ++i) {
        const double s = 0.01 + 0.5 * i / 2000.0;
        const double b = beta_sigma(s, p);
        EXPECT_GE(b, previous);
        EXPECT_GE(beta_sigma_prime(s, p), 0.0);
        previous = b;
    }
    for (double s : {0.05, 0.16, 0.2, 0.25, 0.29, 0.35}) {
        const double h = 1e-6;
        const double fd = (beta_sigma(s + h, p) - beta_sigma(s - h, p)) / (2.0 * h);
        EXPECT_NEAR(beta_sigma_prime(s, p), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
}

TEST(BetaSigma, RejectsNonPositiveArgument)
{
    EXPECT_THROW(beta_sigma(0.0, params(0.4, 2.0)), DomainError);
    EXPECT_THROW(beta_sigma_prime(-1.0, params(0.4, 2.0)), DomainError);
}

TEST(SmoothStep, Endpoints)
{
    EXPECT_EQ(smooth_step(0.0), 0.0);
    EXPECT_EQ(smooth_step(1.0), 1.0);
    EXPECT_DOUBLE_EQ(smooth_step(0.5), 0.5);
    EXPECT_EQ(smooth_step_derivative(0.0), 0.0);
}

TEST(RegularizationParams, Defaults)
{
    const auto p1 = RegularizationParams::defaults(1, 0.1);
    EXPECT_EQ(p1.k, 3);
    EXPECT_EQ(p1.q, 2.0);
    const auto p2 = RegularizationParams::defaults(2, 0.1);
    EXPECT_EQ(p2.k, 4);
    EXPECT_EQ(p2.q, 3.0);
    EXPECT_NO_THROW(p1.validate(1));
    EXPECT_NO_THROW(p2.validate(2));
}

TEST(RegularizationParams, Validation)
{
    auto p = RegularizationParams::defaults(1, 0.1);
    p.k = 2;
    EXPECT_THROW(p.validate(1), ParameterError);
    p = RegularizationParams::defaults(2, 0.1);
    p.k = 3;
    EXPECT_THROW(p.validate(2), ParameterError);
    p = RegularizationParams::defaults(1, 1.0);
    EXPECT_THROW(p.validate(1), ParameterError);
    p = RegularizationParams::defaults(1, 0.1);
    p.q = 1.0;
    EXPECT_THROW(p.validate(1), ParameterError);
}
