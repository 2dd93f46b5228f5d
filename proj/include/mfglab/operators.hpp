#pragma once

#include "mfglab/mfg_model.hpp"
#include "mfglab/regularization.hpp"
#include "mfglab/space_time.hpp"
#include "mfglab/torus_grid.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mfglab {

struct FieldPair {
    PeriodicField density;
    PeriodicField value;
};

struct ResidualPair {
    PeriodicField hj;
    PeriodicField fp;
};

struct SpaceTimePair {
    SpaceTimeField density;
    SpaceTimeField value;
};

struct SpaceTimeResidual {
    SpaceTimeField hj;
    SpaceTimeField fp;
};

FieldPair operator-(const FieldPair& a, const FieldPair& b);
FieldPair operator+(const FieldPair& a, const FieldPair& b);
FieldPair operator*(double s, const FieldPair& a);
ResidualPair operator-(const ResidualPair& a, const ResidualPair& b);
SpaceTimePair operator-(const SpaceTimePair& a, const SpaceTimePair& b);
SpaceTimeResidual operator-(const SpaceTimeResidual& a, const SpaceTimeResidual& b);

/// Pointwise Hamiltonian data along (Dv, eta); Dpp holds d*d row-major components.
struct HamiltonianFields {
    PeriodicField H;
    VectorField Dp;
    PeriodicField Dm;
    std::vector<PeriodicField> Dpp;
    VectorField Dpm;
};

/// Throws DomainError when eta is not admissible for the model.
HamiltonianFields evaluate_fields(const HamiltonianModel& model, const VectorField& Dv, const PeriodicField& eta);

/// Row 1: -v + a lap v - H(x, Dv, eta). Row 2: (eta - 1) - lap(a eta) - div(eta D_pH).
ResidualPair apply_A(const FieldPair& w, const HamiltonianModel& model);

/// apply_A plus sigma(eta + lap^2k eta) + beta_sigma(eta) in row 1 and
/// sigma(v + lap^2k v) in row 2. sigma = 0 gives the unregularized operator.
ResidualPair apply_A_sigma(const FieldPair& w, const HamiltonianModel& model, const RegularizationParams& params);

/// Row 1: v_t + a lap v - H. Row 2: eta_t - lap(a eta) - div(eta D_pH).
/// Time derivatives are second order: centered inside, one-sided at both ends.
SpaceTimeResidual apply_B(const SpaceTimePair& w, const HamiltonianModel& model);

/// Second-order finite-difference time derivative of a space-time field.
SpaceTimeField time_derivative(const SpaceTimeField& f);

/// int (eta eta~ + v v~) dx.
double duality_pairing(const FieldPair& w, const ResidualPair& r);
/// Space-time analogue with the trapezoid rule in time.
double duality_pairing(const SpaceTimePair& w, const SpaceTimeResidual& r);

/// <w1 - w2, A w1 - A w2>; with params, A_sigma replaces A.
double monotonicity_gap(const FieldPair& w1, const FieldPair& w2, const HamiltonianModel& model,
    const RegularizationParams* params = nullptr);
double monotonicity_gap(const SpaceTimePair& w1, const SpaceTimePair& w2, const HamiltonianModel& model);

struct WeakCheck {
    double min_value = 0.0;
    std::size_t worst_index = 0;

    bool passes(double tau) const { return min_value >= -tau; }
};

/// min over tests of <test - candidate, A(test)>. A finite battery only corroborates.
WeakCheck weak_inequality_check(const FieldPair& candidate, std::span<const FieldPair> tests,
    const HamiltonianModel& model);

struct CancellationResult {
    /// |int m a lap v_delta + int Du . D(a eta_delta)|
    double value = 0.0;
    /// |first integral| + |second integral|
    double scale = 0.0;

    double relative() const { return scale > 0.0 ? value / scale : value; }
};

/// Discrete cancellation of the variable-diffusion cross terms, with
/// eta_delta = adapted_mollify(a, m_diff) and v_delta = spatial_mollify(u_diff, 2 passes).
CancellationResult cancellation_residual(const PeriodicField& a, const PeriodicField& m_diff,
    const PeriodicField& u_diff, double delta);

/// Random real trigonometric polynomial with modes 1 <= |xi|_inf <= max_mode,
/// zero mean, carrying its exact spectrum.
PeriodicField random_band_limited(const Grid& grid, std::mt19937_64& rng, int max_mode);

struct BatteryOptions {
    int max_mode = 4;
    /// Sup-norm of the density perturbation.
    double density_amplitude = 0.3;
    /// Sup-norm of the value oscillation.
    double value_amplitude = 0.1;
    /// Bound on the value's random mean.
    double value_offset = 1.0;
    /// Clip floor for densities before renormalization.
    double floor = 1e-3;
};

/// Seeded test pairs: density 1 + perturbation, clipped, renormalized to unit mass;
/// value a random oscillation plus a random constant.
std::vector<FieldPair> make_test_battery(const Grid& grid, std::size_t count, std::uint64_t seed,
    const BatteryOptions& options = {});

} // namespace mfglab
