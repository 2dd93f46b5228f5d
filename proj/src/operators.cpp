#include "mfglab/operators.hpp"

#include "mfglab/errors.hpp"
#include "mfglab/mollify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mfglab {

FieldPair operator-(const FieldPair& a, const FieldPair& b)
{
    return {a.density - b.density, a.value - b.value};
}

FieldPair operator+(const FieldPair& a, const FieldPair& b)
{
    return {a.density + b.density, a.value + b.value};
}

FieldPair operator*(double s, const FieldPair& a)
{
    return {s * a.density, s * a.value};
}

ResidualPair operator-(const ResidualPair& a, const ResidualPair& b)
{
    return {a.hj - b.hj, a.fp - b.fp};
}

SpaceTimePair operator-(const SpaceTimePair& a, const SpaceTimePair& b)
{
    return {a.density - b.density, a.value - b.value};
}

SpaceTimeResidual operator-(const SpaceTimeResidual& a, const SpaceTimeResidual& b)
{
    return {a.hj - b.hj, a.fp - b.fp};
}

HamiltonianFields evaluate_fields(const HamiltonianModel& model, const VectorField& Dv, const PeriodicField& eta)
{
    const Grid& g = eta.grid();
    require_same_grid(g, model.grid(), "Hamiltonian evaluation");
    require_same_grid(g, Dv.grid(), "Hamiltonian evaluation");
    const int d = g.dim();
    const std::size_t N = g.size();
    std::vector<double> H(N), Dm(N);
    std::vector<std::vector<double>> Dp(static_cast<std::size_t>(d), std::vector<double>(N));
    std::vector<std::vector<double>> Dpm(static_cast<std::size_t>(d), std::vector<double>(N));
    std::vector<std::vector<double>> Dpp(static_cast<std::size_t>(d * d), std::vector<double>(N));
    for (std::size_t i = 0; i < N; ++i) {
        const HamiltonianBundle hb = model.evaluate(i, Dv.at(i), eta[i]);
        H[i] = hb.H;
        Dm[i] = hb.Dm;
        for (int a = 0; a < d; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            Dp[ua][i] = hb.Dp[ua];
            Dpm[ua][i] = hb.Dpm[ua];
            for (int b = 0; b < d; ++b) {
                Dpp[ua * static_cast<std::size_t>(d) + static_cast<std::size_t>(b)][i] = hb.Dpp[ua][static_cast<std::size_t>(b)];
            }
        }
    }
    auto as_vector = [&](std::vector<std::vector<double>>& comps) {
        std::vector<PeriodicField> f;
        for (auto& c : comps) {
            f.emplace_back(g, std::move(c));
        }
        return VectorField(g, std::move(f));
    };
    std::vector<PeriodicField> dpp;
    for (auto& c : Dpp) {
        dpp.emplace_back(g, std::move(c));
    }
    return {PeriodicField(g, std::move(H)), as_vector(Dp), PeriodicField(g, std::move(Dm)), std::move(dpp),
        as_vector(Dpm)};
}

namespace {

// Spatial parts shared by A and B: (a lap v - H, -lap(a eta) - div(eta D_pH)).
ResidualPair spatial_terms(const PeriodicField& eta, const PeriodicField& v, const HamiltonianModel& model)
{
    require_same_grid(eta.grid(), v.grid(), "operator input");
    const PeriodicField& a = model.diffusion();
    const HamiltonianFields hf = evaluate_fields(model, gradient(v), eta);
    PeriodicField hj = a * laplacian_power(v, 1) - hf.H;
    PeriodicField fp = -laplacian_power(a * eta, 1) - divergence(eta * hf.Dp);
    return {std::move(hj), std::move(fp)};
}

} // namespace

ResidualPair apply_A(const FieldPair& w, const HamiltonianModel& model)
{
    ResidualPair s = spatial_terms(w.density, w.value, model);
    return {s.hj - w.value, s.fp + (w.density - 1.0)};
}

ResidualPair apply_A_sigma(const FieldPair& w, const HamiltonianModel& model, const RegularizationParams& params)
{
    const int d = w.density.grid().dim();
    if (params.sigma == 0.0) {
        RegularizationParams probe = params;
        probe.sigma = 0.5;
        probe.validate(d);
    } else {
        params.validate(d);
    }
    if (!(w.density.min() > 0.0)) {
        throw DomainError("regularized operator needs a strictly positive density");
    }
    ResidualPair base = apply_A(w, model);
    if (params.sigma == 0.0) {
        return base;
    }
    const double sigma = params.sigma;
    const PeriodicField beta = w.density.map([&](double s) { return beta_sigma(s, params); });
    PeriodicField hj = base.hj + sigma * (w.density + laplacian_power(w.density, 2 * params.k)) + beta;
    PeriodicField fp = base.fp + sigma * (w.value + laplacian_power(w.value, 2 * params.k));
    return {std::move(hj), std::move(fp)};
}

SpaceTimeField time_derivative(const SpaceTimeField& f)
{
    const std::size_t n = f.steps();
    if (n < 2) {
        throw ConfigError("second-order time differences need at least three time levels");
    }
    const double inv = 1.0 / (2.0 * f.dt());
    std::vector<PeriodicField> out;
    out.reserve(n + 1);
    out.push_back(inv * (-3.0 * f.slice(0) + 4.0 * f.slice(1) - f.slice(2)));
    for (std::size_t i = 1; i < n; ++i) {
        out.push_back(inv * (f.slice(i + 1) - f.slice(i - 1)));
    }
    out.push_back(inv * (3.0 * f.slice(n) - 4.0 * f.slice(n - 1) + f.slice(n - 2)));
    return SpaceTimeField(f.horizon(), std::move(out));
}

SpaceTimeResidual apply_B(const SpaceTimePair& w, const HamiltonianModel& model)
{
    if (!w.density.compatible(w.value)) {
        throw ConfigError("density and value live on different space or time grids");
    }
    require_same_grid(w.density.grid(), model.grid(), "apply_B");
    const SpaceTimeField eta_t = time_derivative(w.density);
    const SpaceTimeField v_t = time_derivative(w.value);
    std::vector<PeriodicField> hj, fp;
    for (std::size_t i = 0; i <= w.density.steps(); ++i) {
        ResidualPair s = spatial_terms(w.density.slice(i), w.value.slice(i), model);
        hj.push_back(v_t.slice(i) + s.hj);
        fp.push_back(eta_t.slice(i) + s.fp);
    }
    const double T = w.density.horizon();
    return {SpaceTimeField(T, std::move(hj)), SpaceTimeField(T, std::move(fp))};
}

double duality_pairing(const FieldPair& w, const ResidualPair& r)
{
    return inner(w.density, r.hj) + inner(w.value, r.fp);
}

double duality_pairing(const SpaceTimePair& w, const SpaceTimeResidual& r)
{
    if (!w.density.compatible(r.hj) || !w.value.compatible(r.fp) || !w.density.compatible(w.value)) {
        throw ConfigError("space-time pairing on mismatched grids");
    }
    const std::size_t n = w.density.steps();
    double sum = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double weight = (i == 0 || i == n) ? 0.5 : 1.0;
        sum += weight * (inner(w.density.slice(i), r.hj.slice(i)) + inner(w.value.slice(i), r.fp.slice(i)));
    }
    return sum * w.density.dt();
}

double monotonicity_gap(const FieldPair& w1, const FieldPair& w2, const HamiltonianModel& model,
    const RegularizationParams* params)
{
    auto op = [&](const FieldPair& w) { return params ? apply_A_sigma(w, model, *params) : apply_A(w, model); };
    return duality_pairing(w1 - w2, op(w1) - op(w2));
}

double monotonicity_gap(const SpaceTimePair& w1, const SpaceTimePair& w2, const HamiltonianModel& model)
{
    return duality_pairing(w1 - w2, apply_B(w1, model) - apply_B(w2, model));
}

WeakCheck weak_inequality_check(const FieldPair& candidate, std::span<const FieldPair> tests,
    const HamiltonianModel& model)
{
    if (tests.empty()) {
        throw ParameterError("weak inequality check needs at least one test pair");
    }
    WeakCheck out{std::numeric_limits<double>::infinity(), 0};
    for (std::size_t i = 0; i < tests.size(); ++i) {
        const double value = duality_pairing(tests[i] - candidate, apply_A(tests[i], model));
        if (value < out.min_value) {
            out = {value, i};
        }
    }
    return out;
}

CancellationResult cancellation_residual(const PeriodicField& a, const PeriodicField& m_diff,
    const PeriodicField& u_diff, double delta)
{
    require_same_grid(a.grid(), m_diff.grid(), "cancellation_residual");
    require_same_grid(a.grid(), u_diff.grid(), "cancellation_residual");
    const PeriodicField eta = adapted_mollify(a, m_diff, delta);
    const PeriodicField v = spatial_mollify(u_diff, delta, 2);
    const double first = inner(m_diff * a, laplacian_power(v, 1));
    const double second = inner(gradient(u_diff), gradient(a * eta));
    return {std::abs(first + second), std::abs(first) + std::abs(second)};
}

PeriodicField random_band_limited(const Grid& grid, std::mt19937_64& rng, int max_mode)
{
    if (max_mode < 1 || max_mode >= grid.n() / 2) {
        throw ParameterError("band limit must lie in [1, n/2)");
    }
    std::normal_distribution<double> nd;
    Spectrum s(grid.spectrum_size());
    for (std::size_t m = 0; m < s.size(); ++m) {
        const WaveVector k = grid.wavenumber(m);
        const int top = std::max(std::abs(k[0]), std::abs(k[1]));
        if (top < 1 || top > max_mode) {
            continue;
        }
        const double decay = 1.0 / (1.0 + static_cast<double>(k[0] * k[0] + k[1] * k[1]));
        const double re = nd(rng);
        const double im = nd(rng);
        s[m] = {re * decay, im * decay};
    }
    return PeriodicField::from_spectrum(grid, std::move(s));
}

std::vector<FieldPair> make_test_battery(const Grid& grid, std::size_t count, std::uint64_t seed,
    const BatteryOptions& options)
{
    if (!(options.density_amplitude >= 0.0 && options.density_amplitude < 1.0)) {
        throw ParameterError("density perturbation amplitude must lie in [0, 1)");
    }
    std::mt19937_64 rng(seed);
    auto scaled = [&](double amplitude) {
        PeriodicField f = random_band_limited(grid, rng, options.max_mode);
        const double sup = f.sup_norm();
        return sup > 0.0 ? (amplitude / sup) * f : f;
    };
    std::vector<FieldPair> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        PeriodicField density = scaled(options.density_amplitude) + 1.0;
        if (density.min() < options.floor) {
            density = density.map([&](double x) { return std::max(x, options.floor); });
        }
        density = (1.0 / integrate(density)) * density;
        // A constant offset in the value is the direction that detects a wrong total mass.
        std::uniform_real_distribution<double> offset(-options.value_offset, options.value_offset);
        PeriodicField value = scaled(options.value_amplitude);
        value = value + offset(rng);
        out.push_back({std::move(density), std::move(value)});
    }
    return out;
}

} // namespace mfglab
