#include "mfglab/torus_grid.hpp"

#include "mfglab/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>

namespace mfglab {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// FFTW planning is not thread-safe; executing an existing plan on new arrays is.
class FftPlans {
public:
    FftPlans(int dim, int n)
    {
        const int dims[2] = {n, n};
        const std::size_t real_size = dim == 1 ? n : static_cast<std::size_t>(n) * n;
        const std::size_t half = static_cast<std::size_t>(n / 2 + 1) * (dim == 1 ? 1 : n);
        std::vector<double> r(real_size);
        std::vector<std::complex<double>> c(half);
        auto* cp = reinterpret_cast<fftw_complex*>(c.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        forward_ = fftw_plan_dft_r2c(dim, dims, r.data(), cp, flags);
        backward_ = fftw_plan_dft_c2r(dim, dims, cp, r.data(), flags);
    }
    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;
    ~FftPlans()
    {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }

    void forward(double* in, std::complex<double>* out) const
    {
        fftw_execute_dft_r2c(forward_, in, reinterpret_cast<fftw_complex*>(out));
    }
    void backward(std::complex<double>* in, double* out) const
    {
        fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex*>(in), out);
    }

private:
    fftw_plan forward_;
    fftw_plan backward_;
};

const FftPlans& plans_for(const Grid& grid)
{
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<FftPlans>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{grid.dim(), grid.n()}];
    if (!slot) {
        slot = std::make_unique<FftPlans>(grid.dim(), grid.n());
    }
    return *slot;
}

void check_finite(std::span<const double> values)
{
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw DomainError("non-finite sample at node " + std::to_string(i));
        }
    }
}

template <class Multiplier>
PeriodicField apply_multiplier(const PeriodicField& f, Multiplier&& mult)
{
    const Grid& g = f.grid();
    Spectrum s = f.spectrum();
    for (std::size_t k = 0; k < s.size(); ++k) {
        s[k] *= mult(k);
    }
    return PeriodicField::from_spectrum(g, std::move(s));
}

} // namespace

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(int dim, int n) : dim_(dim), n_(n)
{
    if (dim != 1 && dim != 2) {
        throw ConfigError("unsupported torus dimension " + std::to_string(dim) + " (expected 1 or 2)");
    }
    if (n < 8 || !is_power_of_two(n)) {
        throw ConfigError("axis resolution must be a power of two >= 8, got " + std::to_string(n));
    }
}

std::size_t Grid::size() const noexcept
{
    return dim_ == 1 ? static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_) * n_;
}

std::size_t Grid::spectrum_size() const noexcept
{
    const auto half = static_cast<std::size_t>(n_ / 2 + 1);
    return dim_ == 1 ? half : half * n_;
}

Point Grid::point(std::size_t node) const
{
    if (dim_ == 1) {
        return {static_cast<double>(node) / n_, 0.0};
    }
    return {static_cast<double>(node / n_) / n_, static_cast<double>(node % n_) / n_};
}

std::size_t Grid::node_index(long i, long j) const
{
    const long n = n_;
    const long wi = ((i % n) + n) % n;
    if (dim_ == 1) {
        return static_cast<std::size_t>(wi);
    }
    const long wj = ((j % n) + n) % n;
    return static_cast<std::size_t>(wi * n + wj);
}

WaveVector Grid::wavenumber(std::size_t mode) const
{
    const int half = n_ / 2 + 1;
    if (dim_ == 1) {
        return {static_cast<int>(mode), 0};
    }
    const int i = static_cast<int>(mode / half);
    const int j = static_cast<int>(mode % half);
    return {i <= n_ / 2 ? i : i - n_, j};
}

bool Grid::is_nyquist(std::size_t mode, int axis) const
{
    const WaveVector xi = wavenumber(mode);
    return std::abs(xi[static_cast<std::size_t>(axis)]) == n_ / 2;
}

double Grid::max_wavenumber_sq() const noexcept
{
    const double h = n_ / 2;
    return dim_ * h * h;
}

Grid make_grid(int dim, int n) { return Grid(dim, n); }

// ---------------------------------------------------------------------------
// Transforms

Spectrum forward_transform(const Grid& grid, std::span<const double> values)
{
    std::vector<double> in(values.begin(), values.end());
    Spectrum out(grid.spectrum_size());
    plans_for(grid).forward(in.data(), out.data());
    const double scale = grid.weight();
    for (auto& c : out) {
        c *= scale;
    }
    enforce_hermitian(grid, out);
    return out;
}

std::vector<double> inverse_transform(const Grid& grid, const Spectrum& spectrum)
{
    Spectrum in = spectrum;
    std::vector<double> out(grid.size());
    plans_for(grid).backward(in.data(), out.data());
    return out;
}

void enforce_hermitian(const Grid& grid, Spectrum& s)
{
    const int n = grid.n();
    const int half = n / 2 + 1;
    if (grid.dim() == 1) {
        s[0] = s[0].real();
        s[static_cast<std::size_t>(n / 2)] = s[static_cast<std::size_t>(n / 2)].real();
        return;
    }
    for (int j : {0, n / 2}) {
        for (int i = 0; i <= n / 2; ++i) {
            const int ic = (n - i) % n;
            auto& a = s[static_cast<std::size_t>(i * half + j)];
            auto& b = s[static_cast<std::size_t>(ic * half + j)];
            if (ic == i) {
                a = a.real();
            } else {
                const std::complex<double> avg = 0.5 * (a + std::conj(b));
                a = avg;
                b = std::conj(avg);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// PeriodicField

PeriodicField::PeriodicField(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.size()) {
        throw ConfigError("field has " + std::to_string(values_.size()) + " samples, grid expects " +
                          std::to_string(grid_.size()));
    }
    check_finite(values_);
}

PeriodicField::PeriodicField(Grid grid, std::vector<double> values, Spectrum spectrum)
    : PeriodicField(grid, std::move(values))
{
    spectrum_ = std::move(spectrum);
}

PeriodicField PeriodicField::constant(const Grid& grid, double value)
{
    Spectrum s(grid.spectrum_size());
    s[0] = value;
    return PeriodicField(grid, std::vector<double>(grid.size(), value), std::move(s));
}

PeriodicField PeriodicField::from_spectrum(const Grid& grid, Spectrum spectrum)
{
    if (spectrum.size() != grid.spectrum_size()) {
        throw ConfigError("spectrum size does not match grid");
    }
    enforce_hermitian(grid, spectrum);
    std::vector<double> values = inverse_transform(grid, spectrum);
    return PeriodicField(grid, std::move(values), std::move(spectrum));
}

Spectrum PeriodicField::spectrum() const
{
    if (!spectrum_.empty()) {
        return spectrum_;
    }
    return forward_transform(grid_, values_);
}

double PeriodicField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double PeriodicField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double PeriodicField::sup_norm() const
{
    double m = 0.0;
    for (double v : values_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

PeriodicField PeriodicField::operator-() const
{
    PeriodicField r = *this;
    r *= -1.0;
    return r;
}

PeriodicField& PeriodicField::operator*=(double s)
{
    for (auto& v : values_) {
        v *= s;
    }
    for (auto& c : spectrum_) {
        c *= s;
    }
    check_finite(values_);
    return *this;
}

void require_same_grid(const Grid& a, const Grid& b, const char* where)
{
    if (!(a == b)) {
        throw ConfigError(std::string(where) + ": fields live on different grids");
    }
}

namespace {

template <bool Linear, class Op>
PeriodicField combine(const PeriodicField& a, const PeriodicField& b, Op op)
{
    require_same_grid(a.grid(), b.grid(), "field arithmetic");
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = op(a[i], b[i]);
    }
    if constexpr (Linear) {
        if (a.has_exact_spectrum() && b.has_exact_spectrum()) {
        Spectrum sa = a.spectrum();
        const Spectrum sb = b.spectrum();
        for (std::size_t k = 0; k < sa.size(); ++k) {
            sa[k] = op(sa[k], sb[k]);
        }
            return PeriodicField::from_spectrum(a.grid(), std::move(sa));
        }
    }
    return PeriodicField(a.grid(), std::move(v));
}

} // namespace

PeriodicField operator+(const PeriodicField& a, const PeriodicField& b)
{
    return combine<true>(a, b, [](auto x, auto y) { return x + y; });
}

PeriodicField operator-(const PeriodicField& a, const PeriodicField& b)
{
    return combine<true>(a, b, [](auto x, auto y) { return x - y; });
}

PeriodicField operator*(double s, const PeriodicField& a)
{
    PeriodicField r = a;
    r *= s;
    return r;
}

PeriodicField operator+(const PeriodicField& a, double c)
{
    PeriodicField r = a;
    for (auto& v : r.values_) {
        v += c;
    }
    if (!r.spectrum_.empty()) {
        r.spectrum_[0] += c;
    }
    check_finite(r.values_);
    return r;
}

PeriodicField operator*(const PeriodicField& a, const PeriodicField& b)
{
    return combine<false>(a, b, [](double x, double y) { return x * y; });
}

PeriodicField operator/(const PeriodicField& a, const PeriodicField& b)
{
    return combine<false>(a, b, [](double x, double y) { return x / y; });
}

// ---------------------------------------------------------------------------
// VectorField

VectorField::VectorField(Grid grid, std::vector<PeriodicField> components)
    : grid_(grid), components_(std::move(components))
{
    if (components_.size() != static_cast<std::size_t>(grid_.dim())) {
        throw ConfigError("vector field needs one component per axis");
    }
    for (const auto& c : components_) {
        require_same_grid(grid_, c.grid(), "vector field");
    }
}

VectorField VectorField::zeros(const Grid& grid)
{
    std::vector<PeriodicField> c(static_cast<std::size_t>(grid.dim()), PeriodicField::constant(grid, 0.0));
    return VectorField(grid, std::move(c));
}

std::array<double, 2> VectorField::at(std::size_t node) const
{
    std::array<double, 2> p{0.0, 0.0};
    for (int a = 0; a < dim(); ++a) {
        p[static_cast<std::size_t>(a)] = components_[static_cast<std::size_t>(a)][node];
    }
    return p;
}

namespace {

template <class Op>
VectorField componentwise(const VectorField& a, const VectorField& b, Op op)
{
    require_same_grid(a.grid(), b.grid(), "vector arithmetic");
    std::vector<PeriodicField> c;
    for (int i = 0; i < a.dim(); ++i) {
        c.push_back(op(a[i], b[i]));
    }
    return VectorField(a.grid(), std::move(c));
}

} // namespace

VectorField operator+(const VectorField& a, const VectorField& b)
{
    return componentwise(a, b, [](const auto& x, const auto& y) { return x + y; });
}

VectorField operator-(const VectorField& a, const VectorField& b)
{
    return componentwise(a, b, [](const auto& x, const auto& y) { return x - y; });
}

VectorField operator*(double s, const VectorField& a)
{
    std::vector<PeriodicField> c;
    for (int i = 0; i < a.dim(); ++i) {
        c.push_back(s * a[i]);
    }
    return VectorField(a.grid(), std::move(c));
}

VectorField operator*(const PeriodicField& s, const VectorField& a)
{
    std::vector<PeriodicField> c;
    for (int i = 0; i < a.dim(); ++i) {
        c.push_back(s * a[i]);
    }
    return VectorField(a.grid(), std::move(c));
}

// ---------------------------------------------------------------------------
// Spectral calculus

PeriodicField partial(const PeriodicField& f, int axis)
{
    const Grid& g = f.grid();
    if (axis < 0 || axis >= g.dim()) {
        throw ConfigError("derivative axis out of range");
    }
    return apply_multiplier(f, [&](std::size_t k) -> std::complex<double> {
        if (g.is_nyquist(k, axis)) {
            return 0.0;
        }
        return {0.0, two_pi * g.wavenumber(k)[static_cast<std::size_t>(axis)]};
    });
}

VectorField gradient(const PeriodicField& f)
{
    std::vector<PeriodicField> c;
    for (int a = 0; a < f.grid().dim(); ++a) {
        c.push_back(partial(f, a));
    }
    return VectorField(f.grid(), std::move(c));
}

PeriodicField divergence(const VectorField& v)
{
    PeriodicField out = partial(v[0], 0);
    for (int a = 1; a < v.dim(); ++a) {
        out = out + partial(v[a], a);
    }
    return out;
}

PeriodicField laplacian_power(const PeriodicField& f, int j)
{
    if (j < 1) {
        throw ParameterError("laplacian power must be >= 1");
    }
    const Grid& g = f.grid();
    const double base = 4.0 * std::numbers::pi * std::numbers::pi;
    const double largest = std::pow(base * g.max_wavenumber_sq(), j);
    if (!std::isfinite(largest) || largest > std::numeric_limits<double>::max()) {
        throw ResolutionError("Laplacian power " + std::to_string(j) + " overflows at n=" + std::to_string(g.n()));
    }
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    return apply_multiplier(f, [&](std::size_t k) -> std::complex<double> {
        const WaveVector xi = g.wavenumber(k);
        const double xi2 = static_cast<double>(xi[0]) * xi[0] + static_cast<double>(xi[1]) * xi[1];
        return sign * std::pow(base * xi2, j);
    });
}

double integrate(const PeriodicField& f)
{
    const auto v = f.values();
    return std::accumulate(v.begin(), v.end(), 0.0) * f.grid().weight();
}

double inner(const PeriodicField& f, const PeriodicField& g)
{
    require_same_grid(f.grid(), g.grid(), "inner");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        s += f[i] * g[i];
    }
    return s * f.grid().weight();
}

double inner(const VectorField& v, const VectorField& w)
{
    double s = 0.0;
    for (int a = 0; a < v.dim(); ++a) {
        s += inner(v[a], w[a]);
    }
    return s;
}

double l2_norm(const PeriodicField& f) { return std::sqrt(inner(f, f)); }

double h1_norm(const PeriodicField& f)
{
    const VectorField df = gradient(f);
    return std::sqrt(inner(f, f) + inner(df, df));
}

PeriodicField dot(const VectorField& v, const VectorField& w)
{
    require_same_grid(v.grid(), w.grid(), "dot");
    PeriodicField out = v[0] * w[0];
    for (int a = 1; a < v.dim(); ++a) {
        out = out + v[a] * w[a];
    }
    return out;
}

PeriodicField norm_sq(const VectorField& v) { return dot(v, v); }

} // namespace mfglab
