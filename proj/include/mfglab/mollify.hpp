#pragma once

#include "mfglab/space_time.hpp"
#include "mfglab/torus_grid.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace mfglab {

struct MollifierParams {
    double delta = 0.1;
    double rho = 0.1;
    double h = 0.1;
    double lambda = 0.02;

    /// Throws ParameterError unless all widths are positive, delta < 1/2 and lambda < h/2.
    void validate() const;
};

/// Standard bump exp(-1/(1 - r^2)) for |r| < 1, zero elsewhere.
double bump(double r);

/// Samples w_l of a compact kernel at offsets (first + l) * dt, with sum(w) * dt = 1.
struct Kernel1D {
    double dt = 0.0;
    long first = 0;
    std::vector<double> weights;

    long last() const noexcept { return first + static_cast<long>(weights.size()) - 1; }
};

/// Symmetric bump of half-width `radius`, sampled strictly inside its support.
Kernel1D symmetric_kernel(double radius, double dt);

enum class TimeDirection { forward, backward };

/// psi_rho (support in (0, rho)) or its reflection phi_rho (support in (-rho, 0)).
Kernel1D one_sided_kernel(double rho, double dt, TimeDirection direction);

/// Real Fourier symbol of the periodized spatial bump of width delta, unit mass.
std::vector<double> mollifier_symbol(const Grid& grid, double delta);

/// theta_delta * f (passes = 1) or theta_delta * theta_delta * f (passes = 2).
PeriodicField spatial_mollify(const PeriodicField& f, double delta, int passes);

/// int f (theta * g) - int (theta * f) g.
double symmetry_pairing_residual(const PeriodicField& f, const PeriodicField& g, double delta);

/// (1/a) theta * theta * (a f). Throws DomainError unless min(a) > 0.
PeriodicField adapted_mollify(const PeriodicField& a, const PeriodicField& f, double delta);

/// Uniform samples f(t0 + i dt); values outside the record are zero.
struct TimeSeries {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> values;

    double time(std::size_t i) const noexcept { return t0 + dt * static_cast<double>(i); }
};

/// (K * f)(t_i) = sum_l w_l f(t_i - (first + l) dt) dt, evaluated on the input's own samples.
TimeSeries convolve(const TimeSeries& f, const Kernel1D& kernel);

TimeSeries one_sided_time_mollify(const TimeSeries& f, double rho, TimeDirection direction, int passes);

/// Zero extension of a space-time field outside [0, T].
class ZeroExtension {
public:
    ZeroExtension(SpaceTimeField field, double horizon);

    double horizon() const noexcept { return horizon_; }
    /// Value at a node; exact samples at grid times, linear in between, zero outside [0, T].
    double value(std::size_t node, double t) const;
    /// The node's record padded with `pad` of zeros on both sides.
    TimeSeries series(std::size_t node, double pad) const;

private:
    SpaceTimeField field_;
    double horizon_;
};

/// Throws ConfigError unless T matches the field's horizon.
ZeroExtension zero_extend_time(const SpaceTimeField& f, double horizon);

/// Boundary-compatible smooth approximation of (eta, v): shift by h, mollify in
/// space and time at width lambda, and restore the traces m0 at t = 0 and uT at t = T.
std::pair<SpaceTimeField, SpaceTimeField> boundary_compatible_approx(const SpaceTimeField& eta,
    const SpaceTimeField& v, const PeriodicField& m0, const PeriodicField& uT, const MollifierParams& params);

} // namespace mfglab
