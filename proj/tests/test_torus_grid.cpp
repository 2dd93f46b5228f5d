#include "mfglab/errors.hpp"
#include "mfglab/torus_grid.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mfglab;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

PeriodicField random_trig(const Grid& g, std::mt19937_64& rng, int max_mode)
{
    std::normal_distribution<double> nd;
    std::vector<std::array<double, 4>> terms;
    for (int k = 1; k <= max_mode; ++k) {
        terms.push_back({static_cast<double>(k), static_cast<double>(g.dim() == 2 ? k % 3 : 0), nd(rng), nd(rng)});
    }
    return PeriodicField::from_function(g, [&](const Point& x) {
        double s = 0.2;
        for (const auto& t : terms) {
            const double ph = two_pi * (t[0] * x[0] + t[1] * x[1]);
            s += t[2] * std::cos(ph) + t[3] * std::sin(ph);
        }
        return s;
    });
}

} // namespace

TEST(MakeGrid, AcceptsSupportedShapes)
{
    const Grid g1 = make_grid(1, 64);
    EXPECT_EQ(g1.dim(), 1);
    EXPECT_EQ(g1.n(), 64);
    EXPECT_DOUBLE_EQ(g1.spacing(), 1.0 / 64.0);
    EXPECT_EQ(g1.size(), 64u);

    const Grid g2 = make_grid(2, 32);
    EXPECT_EQ(g2.dim(), 2);
    EXPECT_EQ(g2.size(), 32u * 32u);
}

TEST(MakeGrid, RejectsBadShapes)
{
    EXPECT_THROW(make_grid(3, 64), ConfigError);
    EXPECT_THROW(make_grid(1, 4), ConfigError);
    EXPECT_THROW(make_grid(1, 48), ConfigError);
}

TEST(MakeGrid, IndexWrapsPeriodically)
{
    const Grid g = make_grid(2, 8);
    EXPECT_EQ(g.node_index(-1, 0), g.node_index(7, 0));
    EXPECT_EQ(g.node_index(3, 9), g.node_index(3, 1));
}

TEST(Field, RejectsNonFinite)
{
    const Grid g = make_grid(1, 8);
    std::vector<double> v(8, 1.0);
    v[3] = std::nan("");
    EXPECT_THROW(PeriodicField(g, v), DomainError);
}

TEST(Gradient, ConstantHasZeroGradient)
{
    const Grid g = make_grid(2, 16);
    const VectorField d = gradient(PeriodicField::constant(g, 3.5));
    EXPECT_LE(d[0].sup_norm(), 1e-14);
    EXPECT_LE(d[1].sup_norm(), 1e-14);
}

TEST(Gradient, MatchesAnalyticDerivativeOfSine)
{
    const Grid g = make_grid(1, 64);
    const auto f = PeriodicField::from_function(g, [](const Point& x) { return std::sin(two_pi * x[0]); });
    const PeriodicField df = gradient(f)[0];
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_NEAR(df[i], two_pi * std::cos(two_pi * g.point(i)[0]), 1e-12 * two_pi);
    }
}

TEST(Gradient, IntegrationByPartsVanishes)
{
    std::mt19937_64 rng(7);
    const Grid g = make_grid(1, 64);
    for (int trial = 0; trial < 10; ++trial) {
        const auto f = random_trig(g, rng, 6);
        const auto h = random_trig(g, rng, 6);
        const double s = inner(f, partial(h, 0)) + inner(h, partial(f, 0));
        EXPECT_LE(std::abs(s), 1e-12 * (l2_norm(f) * l2_norm(h) + 1.0));
    }
}

TEST(Divergence, OfGradientIsLaplacian)
{
    std::mt19937_64 rng(11);
    for (int d : {1, 2}) {
        const Grid g = make_grid(d, 32);
        const auto f = random_trig(g, rng, 5);
        const PeriodicField lhs = divergence(gradient(f));
        const PeriodicField rhs = laplacian_power(f, 1);
        EXPECT_LE((lhs - rhs).sup_norm(), 1e-12 * (rhs.sup_norm() + 1.0));
    }
}

TEST(Divergence, IsNegativeAdjointOfGradient)
{
    std::mt19937_64 rng(13);
    for (int d : {1, 2}) {
        const Grid g = make_grid(d, 32);
        for (int trial = 0; trial < 5; ++trial) {
            const auto f = random_trig(g, rng, 7);
            std::vector<PeriodicField> comps;
            for (int a = 0; a < d; ++a) {
                comps.push_back(random_trig(g, rng, 7));
            }
            const VectorField v(g, comps);
            const double vn = std::sqrt(inner(v, v));
            const double s = inner(gradient(f), v) + inner(f, divergence(v));
            EXPECT_LE(std::abs(s), 1e-12 * (l2_norm(f) * vn + 1.0));
        }
    }
}

TEST(Divergence, AdjointHoldsForRoughSamples)
{
    // White-noise samples excite the Nyquist mode; adjointness must survive it.
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Grid g = make_grid(2, 16);
    std::vector<double> fv(g.size()), a(g.size()), b(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        fv[i] = u(rng);
        a[i] = u(rng);
        b[i] = u(rng);
    }
    const PeriodicField f(g, fv);
    const VectorField v(g, {PeriodicField(g, a), PeriodicField(g, b)});
    const double s = inner(gradient(f), v) + inner(f, divergence(v));
    EXPECT_LE(std::abs(s), 1e-12 * (l2_norm(f) * std::sqrt(inner(v, v)) + 1.0));
}

TEST(LaplacianPower, ConstantMapsToZero)
{
    const Grid g = make_grid(1, 32);
    for (int j = 1; j <= 8; ++j) {
        EXPECT_EQ(laplacian_power(PeriodicField::constant(g, 2.0), j).sup_norm(), 0.0);
    }
}

TEST(LaplacianPower, SineEigenvalues)
{
    const Grid g = make_grid(1, 64);
    const auto f = PeriodicField::from_function(g, [](const Point& x) { return std::sin(two_pi * x[0]); });
    const double lam = two_pi * two_pi;
    const PeriodicField l1 = laplacian_power(f, 1);
    const PeriodicField l2 = laplacian_power(f, 2);
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_NEAR(l1[i], -lam * f[i], 1e-12 * lam);
        // Sample round-off at the Nyquist mode is amplified by |xi|^4.
        EXPECT_NEAR(l2[i], lam * lam * f[i], 1e-9 * lam * lam);
    }
}

TEST(LaplacianPower, RejectsNonPositivePower)
{
    const Grid g = make_grid(1, 16);
    EXPECT_THROW(laplacian_power(PeriodicField::constant(g, 1.0), 0), ParameterError);
}

TEST(LaplacianPower, OverflowGuard)
{
    const Grid g = make_grid(2, 1024);
    EXPECT_THROW(laplacian_power(PeriodicField::constant(g, 1.0), 60), ResolutionError);
}

TEST(LaplacianPower, SpectralExactnessBelowNyquist)
{
    const Grid g = make_grid(2, 32);
    const auto f = PeriodicField::from_function(g, [](const Point& x) {
        return std::cos(two_pi * (3 * x[0] - 2 * x[1])) + 0.5 * std::sin(two_pi * 5 * x[1]);
    });
    const PeriodicField l3 = laplacian_power(f, 3);
    const double k1 = two_pi * two_pi * 13.0;
    const double k2 = two_pi * two_pi * 25.0;
    const auto expect = PeriodicField::from_function(g, [&](const Point& x) {
        return -std::pow(k1, 3) * std::cos(two_pi * (3 * x[0] - 2 * x[1]))
            - 0.5 * std::pow(k2, 3) * std::sin(two_pi * 5 * x[1]);
    });
    EXPECT_LE((l3 - expect).sup_norm(), 1e-11 * expect.sup_norm());
}

TEST(ExactSpectrum, HighPowerIsCleanOnSpectralFields)
{
    // Multipliers near 1e30: sample round-off would swamp the result.
    const Grid g = make_grid(1, 128);
    Spectrum c(g.spectrum_size());
    c[0] = 1.0;
    c[1] = {0.0, -0.05};
    const PeriodicField f = PeriodicField::from_spectrum(g, c);
    ASSERT_TRUE(f.has_exact_spectrum());
    const PeriodicField l = laplacian_power(f, 6);
    const double lam = std::pow(two_pi * two_pi, 6);
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_NEAR(l[i], lam * 0.1 * std::sin(two_pi * g.point(i)[0]), 1e-12 * lam);
    }
}

TEST(Integrate, Examples)
{
    const Grid g = make_grid(1, 64);
    EXPECT_EQ(integrate(PeriodicField::constant(g, 1.0)), 1.0);
    const auto s = PeriodicField::from_function(g, [](const Point& x) { return std::sin(two_pi * x[0]); });
    EXPECT_LE(std::abs(integrate(s)), 1e-15);
    const auto c = PeriodicField::from_function(g, [](const Point& x) { return 1.0 + 0.3 * std::cos(two_pi * x[0]); });
    EXPECT_NEAR(integrate(c), 1.0, 1e-15);
}

TEST(Integrate, TranslationInvariant)
{
    std::mt19937_64 rng(3);
    const Grid g = make_grid(1, 32);
    const auto f = random_trig(g, rng, 4);
    std::vector<double> shifted(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        shifted[i] = f[g.node_index(static_cast<long>(i) + 5)];
    }
    EXPECT_NEAR(integrate(PeriodicField(g, shifted)), integrate(f), 1e-14);
}

TEST(H1Norm, Examples)
{
    const Grid g = make_grid(1, 64);
    EXPECT_EQ(h1_norm(PeriodicField::constant(g, 0.0)), 0.0);
    EXPECT_NEAR(h1_norm(PeriodicField::constant(g, -2.5)), 2.5, 1e-15);
    const auto s = PeriodicField::from_function(g, [](const Point& x) { return std::sin(two_pi * x[0]); });
    EXPECT_NEAR(h1_norm(s), std::sqrt(0.5 + two_pi * two_pi / 2.0), 1e-12);
}
