#pragma once

// Uniform periodic grids on the unit torus T^d (d = 1, 2) and the Fourier
// spectral calculus built on them.
//
// Samples are stored row-major: node (i, j) of a 2-D grid lives at i * n + j,
// with i indexing the first axis. Spectra use the real-to-complex half layout
// of the last axis, normalized so that the zero mode equals the mean.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mfglab {

using Spectrum = std::vector<std::complex<double>>;
/// Coordinates of a node; the second entry is 0 on 1-D grids.
using Point = std::array<double, 2>;
/// Signed wavenumber per axis; the second entry is 0 on 1-D grids.
using WaveVector = std::array<int, 2>;

class Grid {
public:
    /// Throws ConfigError unless dim is 1 or 2 and n >= 8 is a power of two.
    Grid(int dim, int n);

    int dim() const noexcept { return dim_; }
    int n() const noexcept { return n_; }
    std::size_t size() const noexcept;
    std::size_t spectrum_size() const noexcept;
    double spacing() const noexcept { return 1.0 / n_; }
    /// Quadrature weight 1/n^d.
    double weight() const noexcept { return 1.0 / static_cast<double>(size()); }

    Point point(std::size_t node) const;
    /// Index of node (i, j), wrapping both indices modulo n.
    std::size_t node_index(long i, long j = 0) const;

    WaveVector wavenumber(std::size_t mode) const;
    /// True when the mode sits on the Nyquist frequency of the given axis.
    bool is_nyquist(std::size_t mode, int axis) const;
    /// Largest |xi|^2 represented on the grid.
    double max_wavenumber_sq() const noexcept;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    int dim_;
    int n_;
};

Grid make_grid(int dim, int n);

/// Normalized forward transform: the zero mode is the mean of the samples.
Spectrum forward_transform(const Grid& grid, std::span<const double> values);
std::vector<double> inverse_transform(const Grid& grid, const Spectrum& spectrum);
/// Restore the symmetry c(-xi) = conj(c(xi)) on the self-conjugate modes of
/// the half spectrum, discarding imaginary round-off.
void enforce_hermitian(const Grid& grid, Spectrum& spectrum);

/// Scalar samples on a periodic grid.
///
/// A field may additionally hold an exact spectrum (when it was built from
/// Fourier coefficients or produced by a spectral operator). Spectral
/// operators then act on those coefficients instead of re-transforming the
/// rounded samples; this matters for high powers of the Laplacian, whose
/// multipliers reach 1e30 on fine grids and would otherwise amplify sample
/// round-off beyond any useful accuracy.
class PeriodicField {
public:
    /// Throws DomainError if any value is not finite, ConfigError on a size mismatch.
    PeriodicField(Grid grid, std::vector<double> values);

    static PeriodicField constant(const Grid& grid, double value);
    static PeriodicField from_spectrum(const Grid& grid, Spectrum spectrum);
    template <class F>
    static PeriodicField from_function(const Grid& grid, F&& f)
    {
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = f(grid.point(i));
        }
        return PeriodicField(grid, std::move(v));
    }

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    bool has_exact_spectrum() const noexcept { return !spectrum_.empty(); }
    /// The exact spectrum when held, otherwise the transform of the samples.
    Spectrum spectrum() const;

    double min() const;
    double max() const;
    double sup_norm() const;

    /// Pointwise map; the result carries no exact spectrum.
    template <class F>
    PeriodicField map(F&& f) const
    {
        std::vector<double> v(values_.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = f(values_[i]);
        }
        return PeriodicField(grid_, std::move(v));
    }

    PeriodicField operator-() const;
    PeriodicField& operator*=(double s);

    friend PeriodicField operator+(const PeriodicField& a, const PeriodicField& b);
    friend PeriodicField operator-(const PeriodicField& a, const PeriodicField& b);
    friend PeriodicField operator*(double s, const PeriodicField& a);
    friend PeriodicField operator*(const PeriodicField& a, double s) { return s * a; }
    friend PeriodicField operator+(const PeriodicField& a, double c);
    friend PeriodicField operator-(const PeriodicField& a, double c) { return a + (-c); }
    /// Pointwise product and quotient.
    friend PeriodicField operator*(const PeriodicField& a, const PeriodicField& b);
    friend PeriodicField operator/(const PeriodicField& a, const PeriodicField& b);

private:
    PeriodicField(Grid grid, std::vector<double> values, Spectrum spectrum);

    Grid grid_;
    std::vector<double> values_;
    Spectrum spectrum_;
};

/// One periodic field per axis.
class VectorField {
public:
    VectorField(Grid grid, std::vector<PeriodicField> components);
    static VectorField zeros(const Grid& grid);

    const Grid& grid() const noexcept { return grid_; }
    int dim() const noexcept { return grid_.dim(); }
    const PeriodicField& operator[](int axis) const { return components_.at(static_cast<std::size_t>(axis)); }
    std::array<double, 2> at(std::size_t node) const;

    friend VectorField operator+(const VectorField& a, const VectorField& b);
    friend VectorField operator-(const VectorField& a, const VectorField& b);
    friend VectorField operator*(double s, const VectorField& a);
    friend VectorField operator*(const PeriodicField& s, const VectorField& a);

private:
    Grid grid_;
    std::vector<PeriodicField> components_;
};

void require_same_grid(const Grid& a, const Grid& b, const char* where);

/// Spectral partial derivative along one axis (Nyquist mode dropped).
PeriodicField partial(const PeriodicField& f, int axis);
VectorField gradient(const PeriodicField& f);
PeriodicField divergence(const VectorField& v);
/// Fourier multiplier (-4 pi^2 |xi|^2)^j. Throws ParameterError for j < 1 and
/// ResolutionError when the largest multiplier is not representable.
PeriodicField laplacian_power(const PeriodicField& f, int j);

/// Quadrature (1/n^d) * sum of samples.
double integrate(const PeriodicField& f);
double inner(const PeriodicField& f, const PeriodicField& g);
double inner(const VectorField& v, const VectorField& w);
double l2_norm(const PeriodicField& f);
double h1_norm(const PeriodicField& f);
/// Pointwise Euclidean dot product.
PeriodicField dot(const VectorField& v, const VectorField& w);
/// Pointwise |v|^2.
PeriodicField norm_sq(const VectorField& v);

} // namespace mfglab
