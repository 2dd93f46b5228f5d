#include "mfglab/errors.hpp"
#include "mfglab/operators.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace mfglab;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

PeriodicField cosine(const Grid& g, double mean, double amp)
{
    return PeriodicField::from_function(g, [=](const Point& x) { return mean + amp * std::cos(two_pi * x[0]); });
}

HamiltonianModel trivial_qlog(const Grid& g)
{
    return HamiltonianModel::quadratic_log(PeriodicField::constant(g, 1.0), VectorField::zeros(g),
        PeriodicField::constant(g, 0.0));
}

HamiltonianModel rich_qlog(const Grid& g)
{
    std::vector<PeriodicField> b;
    for (int a = 0; a < g.dim(); ++a) {
        b.push_back(PeriodicField::from_function(g, [](const Point& x) { return 0.2 * std::sin(two_pi * x[0]); }));
    }
    return HamiltonianModel::quadratic_log(cosine(g, 1.0, 0.3), VectorField(g, b), cosine(g, 0.0, 0.1));
}

RegularizationParams reg(double sigma) { return RegularizationParams::defaults(1, sigma); }

} // namespace

TEST(ApplyA, TrivialSolutionHasZeroResidual)
{
    const Grid g = make_grid(1, 64);
    const FieldPair w{PeriodicField::constant(g, 1.0), PeriodicField::constant(g, 0.0)};
    const ResidualPair r = apply_A(w, trivial_qlog(g));
    EXPECT_LE(r.hj.sup_norm(), 1e-12);
    EXPECT_LE(r.fp.sup_norm(), 1e-12);
}

TEST(ApplyA, ConstantValueShiftsFirstRow)
{
    const Grid g = make_grid(2, 16);
    const FieldPair w{PeriodicField::constant(g, 1.0), PeriodicField::constant(g, 0.7)};
    const ResidualPair r = apply_A(w, trivial_qlog(g));
    EXPECT_LE((r.hj + 0.7).sup_norm(), 1e-12);
    EXPECT_LE(r.fp.sup_norm(), 1e-12);
}

TEST(ApplyA, CongestionRejectsZeroDensity)
{
    const Grid g = make_grid(1, 16);
    const auto model = HamiltonianModel::congestion(PeriodicField::constant(g, 1.0), VectorField::zeros(g), 2.0, 1.0);
    std::vector<double> eta(g.size(), 1.0);
    eta[4] = 0.0;
    const FieldPair w{PeriodicField(g, eta), PeriodicField::constant(g, 0.0)};
    EXPECT_THROW(apply_A(w, model), DomainError);
}

TEST(ApplyA, MatchesHandWrittenQuadraticLogSystem)
{
    // Row 1 = -v + div(a Dv) - b.Dv - |Dv|^2/2 - V + log eta.
    // Row 2 = eta - div(a D eta) - div(eta b) - div(eta Dv) - 1.
    const Grid g = make_grid(1, 64);
    const auto model = rich_qlog(g);
    const auto eta = PeriodicField::from_function(g, [](const Point& x) { return 1.0 + 0.2 * std::sin(two_pi * 2 * x[0]); });
    const auto v = PeriodicField::from_function(g, [](const Point& x) { return 0.3 * std::cos(two_pi * 3 * x[0]); });
    const PeriodicField& a = model.diffusion();
    const VectorField Dv = gradient(v);
    const VectorField& b = model.drift();
    const PeriodicField row1 = -v + divergence(a * Dv) - dot(b, Dv) - 0.5 * norm_sq(Dv) - model.potential()
        + eta.map([](double s) { return std::log(s); });
    const PeriodicField row2 = eta - divergence(a * gradient(eta)) - divergence(eta * b) - divergence(eta * Dv) - 1.0;
    const ResidualPair r = apply_A({eta, v}, model);
    EXPECT_LE((r.hj - row1).sup_norm(), 1e-11);
    EXPECT_LE((r.fp - row2).sup_norm(), 1e-11);
}

TEST(ApplyASigma, ZeroSigmaReducesToA)
{
    const Grid g = make_grid(1, 64);
    const auto model = rich_qlog(g);
    const FieldPair w{cosine(g, 1.0, 0.4), cosine(g, 0.2, 0.3)};
    const ResidualPair ra = apply_A(w, model);
    const ResidualPair rs = apply_A_sigma(w, model, reg(0.0));
    EXPECT_LE((ra.hj - rs.hj).sup_norm(), 1e-13);
    EXPECT_LE((ra.fp - rs.fp).sup_norm(), 1e-13);
}

TEST(ApplyASigma, TrivialPairResidual)
{
    const Grid g = make_grid(1, 128);
    const FieldPair w{PeriodicField::constant(g, 1.0), PeriodicField::constant(g, 0.0)};
    const ResidualPair r = apply_A_sigma(w, trivial_qlog(g), reg(1e-2));
    EXPECT_LE((r.hj - 1e-2).sup_norm(), 1e-14);
    EXPECT_LE(r.fp.sup_norm(), 1e-14);
}

TEST(ApplyASigma, DifferenceIsExactlyTheRegularization)
{
    const Grid g = make_grid(1, 64);
    const auto model = rich_qlog(g);
    const auto p = reg(0.3);
    std::mt19937_64 rng(3);
    const PeriodicField eta = 0.05 * random_band_limited(g, rng, 3) + 0.5;
    const PeriodicField v = random_band_limited(g, rng, 3);
    const ResidualPair ra = apply_A({eta, v}, model);
    const ResidualPair rs = apply_A_sigma({eta, v}, model, p);
    const PeriodicField beta = eta.map([&](double s) { return beta_sigma(s, p); });
    const PeriodicField t1 = p.sigma * (eta + laplacian_power(eta, 2 * p.k)) + beta;
    const PeriodicField t2 = p.sigma * (v + laplacian_power(v, 2 * p.k));
    EXPECT_LE((rs.hj - ra.hj - t1).sup_norm(), 1e-10 * (t1.sup_norm() + 1.0));
    EXPECT_LE((rs.fp - ra.fp - t2).sup_norm(), 1e-10 * (t2.sup_norm() + 1.0));
}

TEST(ApplyASigma, PenaltyActsBelowHalfSigma)
{
    // eta = 0.5 - 0.45 cos(2 pi x): minimum 0.05 < sigma/2 at x = 0, above sigma at x = 1/2.
    const Grid g = make_grid(1, 16);
    const auto p = reg(0.4);
    Spectrum c(g.spectrum_size());
    c[0] = 0.5;
    c[1] = -0.225;
    const FieldPair w{PeriodicField::from_spectrum(g, c), PeriodicField::constant(g, 0.0)};
    const ResidualPair rs = apply_A_sigma(w, trivial_qlog(g), p);
    const ResidualPair rz = apply_A_sigma(w, trivial_qlog(g), reg(0.0));
    const PeriodicField extra = rs.hj - rz.hj - p.sigma * (w.density + laplacian_power(w.density, 2 * p.k));
    EXPECT_NEAR(w.density[0], 0.05, 1e-15);
    EXPECT_NEAR(extra[0], -std::pow(0.05, -p.q), 1e-6);
    EXPECT_NEAR(extra[8], 0.0, 1e-6);
}

TEST(ApplyASigma, RejectsNonPositiveDensity)
{
    const Grid g = make_grid(1, 16);
    const auto model = HamiltonianModel::power(PeriodicField::constant(g, 1.0), VectorField::zeros(g), 2.0, 1.0);
    const FieldPair w{PeriodicField::constant(g, 0.0), PeriodicField::constant(g, 0.0)};
    EXPECT_THROW(apply_A_sigma(w, model, reg(0.1)), DomainError);
}

TEST(ApplyB, LinearValueInTime)
{
    const Grid g = make_grid(1, 16);
    const auto eta = SpaceTimeField::from_function(g, 1.0, 10, [](const Point&, double) { return 1.0; });
    const auto v = SpaceTimeField::from_function(g, 1.0, 10, [](const Point&, double t) { return t; });
    const SpaceTimeResidual r = apply_B({eta, v}, trivial_qlog(g));
    for (std::size_t i = 0; i <= 10; ++i) {
        EXPECT_LE((r.hj.slice(i) - 1.0).sup_norm(), 1e-12);
        EXPECT_LE(r.fp.slice(i).sup_norm(), 1e-12);
    }
}

TEST(ApplyB, TimeConstantPairGivesSpatialTerms)
{
    const Grid g = make_grid(1, 32);
    const auto model = rich_qlog(g);
    const FieldPair w{cosine(g, 1.0, 0.3), cosine(g, 0.0, 0.2)};
    const SpaceTimeField eta(2.0, std::vector<PeriodicField>(6, w.density));
    const SpaceTimeField v(2.0, std::vector<PeriodicField>(6, w.value));
    const SpaceTimeResidual r = apply_B({eta, v}, model);
    const ResidualPair ra = apply_A(w, model);
    for (std::size_t i = 0; i <= 5; ++i) {
        EXPECT_LE((r.hj.slice(i) - (ra.hj + w.value)).sup_norm(), 1e-12);
        EXPECT_LE((r.fp.slice(i) - (ra.fp - (w.density - 1.0))).sup_norm(), 1e-12);
    }
}

TEST(ApplyB, SecondOrderTimeDerivative)
{
    const Grid g = make_grid(1, 8);
    const auto f = SpaceTimeField::from_function(g, 1.0, 20, [](const Point&, double t) { return t * t - 3.0 * t; });
    const SpaceTimeField ft = time_derivative(f);
    for (std::size_t i = 0; i <= 20; ++i) {
        EXPECT_NEAR(ft.slice(i)[0], 2.0 * f.time(i) - 3.0, 1e-12);
    }
}

TEST(ApplyB, RejectsMismatchedGrids)
{
    const Grid g = make_grid(1, 16);
    const auto eta = SpaceTimeField::from_function(g, 1.0, 10, [](const Point&, double) { return 1.0; });
    const auto v = SpaceTimeField::from_function(g, 1.0, 12, [](const Point&, double) { return 0.0; });
    EXPECT_THROW(apply_B({eta, v}, trivial_qlog(g)), ConfigError);
    const Grid g2 = make_grid(1, 32);
    const auto v2 = SpaceTimeField::from_function(g2, 1.0, 10, [](const Point&, double) { return 0.0; });
    EXPECT_THROW(apply_B({eta, v2}, trivial_qlog(g)), ConfigError);
}

TEST(DualityPairing, Examples)
{
    const Grid g = make_grid(1, 16);
    const auto one = PeriodicField::constant(g, 1.0);
    const auto zero = PeriodicField::constant(g, 0.0);
    EXPECT_EQ(duality_pairing(FieldPair{cosine(g, 1.0, 0.5), one}, ResidualPair{zero, zero}), 0.0);
    EXPECT_EQ(duality_pairing(FieldPair{one, one}, ResidualPair{one, one}), 2.0);
    const FieldPair w{cosine(g, 1.0, 0.5), cosine(g, -0.3, 0.2)};
    const ResidualPair r{cosine(g, 0.1, 0.9), cosine(g, 2.0, -0.4)};
    EXPECT_NEAR(duality_pairing(2.5 * w, r), 2.5 * duality_pairing(w, r), 1e-13);
}

TEST(DualityPairing, SpaceTimeTrapezoid)
{
    const Grid g = make_grid(1, 8);
    const auto one = SpaceTimeField::from_function(g, 2.0, 4, [](const Point&, double) { return 1.0; });
    const auto lin = SpaceTimeField::from_function(g, 2.0, 4, [](const Point&, double t) { return t; });
    EXPECT_NEAR(duality_pairing(SpaceTimePair{one, one}, SpaceTimeResidual{lin, one}), 2.0 + 2.0, 1e-14);
}

TEST(MonotonicityGap, SelfGapIsZero)
{
    const Grid g = make_grid(1, 32);
    const auto battery = make_test_battery(g, 3, 5);
    EXPECT_EQ(monotonicity_gap(battery[0], battery[0], rich_qlog(g)), 0.0);
}

TEST(MonotonicityGap, QuadraticLogBatteryIsMonotone)
{
    const Grid g = make_grid(1, 64);
    const auto model = rich_qlog(g);
    const auto battery = make_test_battery(g, 101, 8);
    for (std::size_t i = 0; i + 1 < battery.size(); ++i) {
        const double gap = monotonicity_gap(battery[i], battery[i + 1], model);
        EXPECT_GE(gap, -1e-10);
        EXPECT_NEAR(gap, monotonicity_gap(battery[i + 1], battery[i], model), 1e-12 * (std::abs(gap) + 1.0));
    }
}

TEST(MonotonicityGap, RegularizationOnlyAddsMonotonicity)
{
    const Grid g = make_grid(1, 64);
    const auto model = rich_qlog(g);
    const auto p = reg(0.01);
    const auto battery = make_test_battery(g, 21, 9);
    for (std::size_t i = 0; i + 1 < battery.size(); ++i) {
        const double ga = monotonicity_gap(battery[i], battery[i + 1], model);
        const double gs = monotonicity_gap(battery[i], battery[i + 1], model, &p);
        EXPECT_GE(gs, ga - 1e-10);
    }
}

TEST(MonotonicityGap, SpaceTimeSelfGapAndSymmetry)
{
    const Grid g = make_grid(1, 16);
    const auto model = trivial_qlog(g);
    auto pair = [&](double s) {
        return SpaceTimePair{
            SpaceTimeField::from_function(g, 1.0, 8, [s](const Point& x, double t) { return 1.0 + 0.2 * std::cos(two_pi * x[0] + s * t); }),
            SpaceTimeField::from_function(g, 1.0, 8, [s](const Point& x, double t) { return s * t * std::sin(two_pi * x[0]); })};
    };
    const auto w1 = pair(0.5), w2 = pair(1.5);
    EXPECT_EQ(monotonicity_gap(w1, w1, model), 0.0);
    EXPECT_NEAR(monotonicity_gap(w1, w2, model), monotonicity_gap(w2, w1, model), 1e-12);
}

TEST(WeakInequality, ExactZeroOfA)
{
    const Grid g = make_grid(1, 32);
    const auto model = trivial_qlog(g);
    const FieldPair candidate{PeriodicField::constant(g, 1.0), PeriodicField::constant(g, 0.0)};
    auto tests = make_test_battery(g, 20, 10);
    tests.push_back(candidate);
    const WeakCheck wc = weak_inequality_check(candidate, tests, model);
    EXPECT_GE(wc.min_value, -1e-12);
    EXPECT_TRUE(wc.passes(1e-10));
    const FieldPair only[] = {candidate};
    EXPECT_NEAR(weak_inequality_check(candidate, only, model).min_value, 0.0, 1e-15);
}

TEST(WeakInequality, WrongMassIsFlagged)
{
    const Grid g = make_grid(1, 32);
    const auto model = trivial_qlog(g);
    const FieldPair candidate{PeriodicField::constant(g, 2.0), PeriodicField::constant(g, 0.0)};
    const auto tests = make_test_battery(g, 50, 11);
    const WeakCheck wc = weak_inequality_check(candidate, tests, model);
    EXPECT_LT(wc.min_value, -0.1);
    EXPECT_FALSE(wc.passes(1e-4));
}

TEST(Cancellation, UnitDiffusion)
{
    const Grid g = make_grid(1, 64);
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const auto res = cancellation_residual(PeriodicField::constant(g, 1.0), random_band_limited(g, rng, 6),
            random_band_limited(g, rng, 6), 0.1);
        EXPECT_LE(res.value, 1e-11 * res.scale);
    }
}

TEST(Cancellation, VariableDiffusion)
{
    for (int d : {1, 2}) {
        const Grid g = make_grid(d, d == 1 ? 128 : 32);
        const auto a = cosine(g, 1.0, 0.3);
        std::mt19937_64 rng(13);
        for (int trial = 0; trial < 10; ++trial) {
            const auto res = cancellation_residual(a, random_band_limited(g, rng, 6), random_band_limited(g, rng, 6), 0.1);
            EXPECT_LE(res.relative(), 1e-10);
        }
    }
}

TEST(Cancellation, ZeroDensityDifference)
{
    const Grid g = make_grid(1, 32);
    std::mt19937_64 rng(14);
    const auto res = cancellation_residual(cosine(g, 1.0, 0.3), PeriodicField::constant(g, 0.0), random_band_limited(g, rng, 4), 0.1);
    EXPECT_EQ(res.value, 0.0);
}

TEST(Battery, DensitiesArePositiveWithUnitMass)
{
    for (int d : {1, 2}) {
        const Grid g = make_grid(d, 32);
        const auto battery = make_test_battery(g, 30, 15);
        for (const auto& w : battery) {
            EXPECT_GT(w.density.min(), 0.0);
            EXPECT_NEAR(integrate(w.density), 1.0, 1e-14);
            EXPECT_LE(w.value.sup_norm(), 1.1 + 1e-12);
        }
        const auto again = make_test_battery(g, 30, 15);
        EXPECT_EQ(battery[7].value[3], again[7].value[3]);
    }
}
