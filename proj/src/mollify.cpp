#include "mfglab/mollify.hpp"

#include "mfglab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mfglab {

void MollifierParams::validate() const
{
    if (!(delta > 0.0 && delta < 0.5)) {
        throw ParameterError("spatial width delta must lie in (0, 1/2), got " + std::to_string(delta));
    }
    if (!(rho > 0.0)) {
        throw ParameterError("temporal width rho must be positive");
    }
    if (!(h > 0.0)) {
        throw ParameterError("time shift h must be positive");
    }
    if (!(lambda > 0.0 && lambda < h / 2.0)) {
        throw ParameterError("space-time width lambda must lie in (0, h/2)");
    }
    if (!(lambda < 0.5)) {
        throw ParameterError("space-time width lambda must be below 1/2");
    }
}

double bump(double r)
{
    const double r2 = r * r;
    return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
}

namespace {

void normalize(Kernel1D& k)
{
    double sum = 0.0;
    for (double w : k.weights) {
        sum += w;
    }
    if (!(sum > 0.0)) {
        throw ParameterError("kernel width does not resolve any interior sample");
    }
    for (double& w : k.weights) {
        w /= sum * k.dt;
    }
}

void require_width(double width, double dt, const char* name)
{
    if (!(width > 0.0)) {
        throw ParameterError(std::string(name) + " must be positive");
    }
    if (!(dt > 0.0)) {
        throw ParameterError("time step must be positive");
    }
}

void require_passes(int passes)
{
    if (passes != 1 && passes != 2) {
        throw ParameterError("mollification passes must be 1 or 2");
    }
}

} // namespace

Kernel1D symmetric_kernel(double radius, double dt)
{
    require_width(radius, dt, "kernel radius");
    long j = 0;
    while (static_cast<double>(j + 1) * dt < radius) {
        ++j;
    }
    Kernel1D k{dt, -j, {}};
    for (long o = -j; o <= j; ++o) {
        k.weights.push_back(bump(static_cast<double>(o) * dt / radius));
    }
    normalize(k);
    return k;
}

Kernel1D one_sided_kernel(double rho, double dt, TimeDirection direction)
{
    require_width(rho, dt, "rho");
    const double half = rho / 2.0;
    std::vector<double> psi;
    for (long j = 1; static_cast<double>(j) * dt < rho; ++j) {
        psi.push_back(bump((static_cast<double>(j) * dt - half) / half));
    }
    Kernel1D k{dt, 1, std::move(psi)};
    normalize(k);
    if (direction == TimeDirection::backward) {
        std::reverse(k.weights.begin(), k.weights.end());
        k.first = -static_cast<long>(k.weights.size());
    }
    return k;
}

std::vector<double> mollifier_symbol(const Grid& grid, double delta)
{
    if (!(delta > 0.0 && delta < 0.5)) {
        throw ParameterError("spatial width delta must lie in (0, 1/2), got " + std::to_string(delta));
    }
    std::vector<double> theta(grid.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point x = grid.point(i);
        double r2 = 0.0;
        for (int a = 0; a < grid.dim(); ++a) {
            const double c = std::min(x[static_cast<std::size_t>(a)], 1.0 - x[static_cast<std::size_t>(a)]);
            r2 += c * c;
        }
        theta[i] = bump(std::sqrt(r2) / delta);
        sum += theta[i];
    }
    const double mean = sum * grid.weight();
    for (double& t : theta) {
        t /= mean;
    }
    const Spectrum s = forward_transform(grid, theta);
    std::vector<double> symbol(s.size());
    for (std::size_t m = 0; m < s.size(); ++m) {
        symbol[m] = s[m].real();
    }
    symbol[0] = 1.0;
    return symbol;
}

PeriodicField spatial_mollify(const PeriodicField& f, double delta, int passes)
{
    require_passes(passes);
    const std::vector<double> symbol = mollifier_symbol(f.grid(), delta);
    Spectrum s = f.spectrum();
    for (std::size_t m = 0; m < s.size(); ++m) {
        s[m] *= passes == 1 ? symbol[m] : symbol[m] * symbol[m];
    }
    return PeriodicField::from_spectrum(f.grid(), std::move(s));
}

double symmetry_pairing_residual(const PeriodicField& f, const PeriodicField& g, double delta)
{
    require_same_grid(f.grid(), g.grid(), "symmetry_pairing_residual");
    return inner(f, spatial_mollify(g, delta, 1)) - inner(spatial_mollify(f, delta, 1), g);
}

PeriodicField adapted_mollify(const PeriodicField& a, const PeriodicField& f, double delta)
{
    require_same_grid(a.grid(), f.grid(), "adapted_mollify");
    if (!(a.min() > 0.0)) {
        throw DomainError("adapted mollification needs a strictly positive coefficient");
    }
    return spatial_mollify(a * f, delta, 2) / a;
}

TimeSeries convolve(const TimeSeries& f, const Kernel1D& kernel)
{
    if (std::abs(kernel.dt - f.dt) > 1e-12 * f.dt) {
        throw ParameterError("kernel and series use different time steps");
    }
    const long n = static_cast<long>(f.values.size());
    TimeSeries out{f.t0, f.dt, std::vector<double>(f.values.size(), 0.0)};
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t l = 0; l < kernel.weights.size(); ++l) {
            const long src = i - (kernel.first + static_cast<long>(l));
            if (src >= 0 && src < n) {
                acc += kernel.weights[l] * f.values[static_cast<std::size_t>(src)];
            }
        }
        out.values[static_cast<std::size_t>(i)] = acc * f.dt;
    }
    return out;
}

TimeSeries one_sided_time_mollify(const TimeSeries& f, double rho, TimeDirection direction, int passes)
{
    require_passes(passes);
    const Kernel1D k = one_sided_kernel(rho, f.dt, direction);
    TimeSeries out = convolve(f, k);
    if (passes == 2) {
        out = convolve(out, k);
    }
    return out;
}

ZeroExtension::ZeroExtension(SpaceTimeField field, double horizon)
    : field_(std::move(field)), horizon_(horizon)
{
    if (std::abs(horizon_ - field_.horizon()) > 1e-12 * field_.horizon()) {
        throw ConfigError("zero extension horizon differs from the field's time grid");
    }
}

double ZeroExtension::value(std::size_t node, double t) const
{
    if (t < 0.0 || t > horizon_) {
        return 0.0;
    }
    const double s = t / field_.dt();
    const auto k = std::min(static_cast<std::size_t>(s), field_.steps());
    const double frac = s - static_cast<double>(k);
    const double lo = field_.slice(k)[node];
    if (k == field_.steps() || frac == 0.0) {
        return lo;
    }
    return (1.0 - frac) * lo + frac * field_.slice(k + 1)[node];
}

TimeSeries ZeroExtension::series(std::size_t node, double pad) const
{
    const auto npad = static_cast<std::size_t>(std::ceil(std::max(pad, 0.0) / field_.dt()));
    TimeSeries out{-static_cast<double>(npad) * field_.dt(), field_.dt(), {}};
    out.values.assign(npad, 0.0);
    for (const auto& s : field_.slices()) {
        out.values.push_back(s[node]);
    }
    out.values.insert(out.values.end(), npad, 0.0);
    return out;
}

ZeroExtension zero_extend_time(const SpaceTimeField& f, double horizon)
{
    return ZeroExtension(f, horizon);
}

namespace {

// Samples of f at time tau in [0, T], linear between grid times.
std::vector<double> slice_at(const SpaceTimeField& f, double tau)
{
    const double s = std::clamp(tau / f.dt(), 0.0, static_cast<double>(f.steps()));
    const auto k = std::min(static_cast<std::size_t>(s), f.steps());
    const double frac = s - static_cast<double>(k);
    const auto lo = f.slice(k).values();
    std::vector<double> out(lo.begin(), lo.end());
    if (k < f.steps() && frac > 1e-12) {
        const auto hi = f.slice(k + 1).values();
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = (1.0 - frac) * out[i] + frac * hi[i];
        }
    }
    return out;
}

// mu_lambda * (f_shifted - trace), where f_shifted(t) - trace vanishes outside
// the window selected by `inside`.
template <class Inside>
SpaceTimeField mollified_correction(const SpaceTimeField& f, const PeriodicField& trace, double shift,
    double lambda, Inside inside)
{
    const Kernel1D k = symmetric_kernel(lambda, f.dt());
    const Grid& g = f.grid();
    std::vector<PeriodicField> out;
    out.reserve(f.steps() + 1);
    for (std::size_t i = 0; i <= f.steps(); ++i) {
        std::vector<double> acc(g.size(), 0.0);
        for (std::size_t l = 0; l < k.weights.size(); ++l) {
            const double t = f.time(i) - static_cast<double>(k.first + static_cast<long>(l)) * f.dt();
            const double tau = t + shift;
            if (!inside(tau)) {
                continue;
            }
            const std::vector<double> s = slice_at(f, tau);
            const double w = k.weights[l] * f.dt();
            for (std::size_t n = 0; n < g.size(); ++n) {
                acc[n] += w * (s[n] - trace[n]);
            }
        }
        out.push_back(spatial_mollify(PeriodicField(g, std::move(acc)), lambda, 1) + trace);
    }
    return SpaceTimeField(f.horizon(), std::move(out));
}

} // namespace

std::pair<SpaceTimeField, SpaceTimeField> boundary_compatible_approx(const SpaceTimeField& eta,
    const SpaceTimeField& v, const PeriodicField& m0, const PeriodicField& uT, const MollifierParams& params)
{
    params.validate();
    if (!eta.compatible(v)) {
        throw ConfigError("density and value fields live on different space or time grids");
    }
    require_same_grid(eta.grid(), m0.grid(), "boundary_compatible_approx");
    require_same_grid(eta.grid(), uT.grid(), "boundary_compatible_approx");
    if (!(eta.min() > 0.0)) {
        throw DomainError("density must be strictly positive");
    }
    if (!(m0.min() > 0.0)) {
        throw DomainError("initial density must be strictly positive");
    }
    if (!(params.h < eta.horizon())) {
        throw ParameterError("time shift h must be shorter than the horizon");
    }
    const double T = eta.horizon();
    SpaceTimeField m = mollified_correction(eta, m0, -params.h, params.lambda,
        [](double tau) { return tau >= 0.0; });
    SpaceTimeField u = mollified_correction(v, uT, params.h, params.lambda,
        [T](double tau) { return tau <= T; });

    const double cbar = std::min(eta.min(), m0.min());
    if (m.min() < cbar / 2.0) {
        throw ParameterError("lambda too large: smoothed density drops below half the input minimum");
    }
    return {std::move(m), std::move(u)};
}

} // namespace mfglab
