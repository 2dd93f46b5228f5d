#pragma once

#include "mfglab/torus_grid.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mfglab {

enum class Family { power, congestion, quadratic_log };

std::string to_string(Family f);
/// Throws ConfigError on an unknown name.
Family family_from_string(const std::string& name);

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

/// H and its derivatives at one (x, p, m); unused entries are zero on 1-D grids.
struct HamiltonianBundle {
    double H = 0.0;
    Vec2 Dp{};
    double Dm = 0.0;
    Mat2 Dpp{};
    Vec2 Dpm{};
};

/// Hamiltonian family with its coefficient fields: diffusion a > 0, drift b, potential V.
class HamiltonianModel {
public:
    /// (1 + |p|^2)^(gamma/2) / gamma - m^beta.
    static HamiltonianModel power(PeriodicField a, VectorField b, double gamma, double beta);
    /// (1 + |p|^2)^(gamma/2) / (gamma m^alpha).
    static HamiltonianModel congestion(PeriodicField a, VectorField b, double gamma, double alpha);
    /// |p|^2/2 - Da.p + b.p + V - log m.
    static HamiltonianModel quadratic_log(PeriodicField a, VectorField b, PeriodicField V);

    Family family() const noexcept { return family_; }
    double gamma() const noexcept { return gamma_; }
    double beta() const noexcept { return beta_; }
    double alpha() const noexcept { return alpha_; }
    const Grid& grid() const noexcept { return a_.grid(); }
    const PeriodicField& diffusion() const noexcept { return a_; }
    const VectorField& drift() const noexcept { return b_; }
    const PeriodicField& potential() const noexcept { return V_; }
    const VectorField& diffusion_gradient() const noexcept { return Da_; }

    /// Whether m = 0 is an admissible density value.
    bool admits_zero_density() const noexcept { return family_ == Family::power; }
    /// Throws DomainError when m is outside the family's admissible set.
    void check_density(double m) const;

    HamiltonianBundle evaluate(std::size_t node, Vec2 p, double m) const;

private:
    HamiltonianModel(Family family, PeriodicField a, VectorField b, PeriodicField V, double gamma, double beta,
        double alpha);

    Family family_;
    PeriodicField a_;
    VectorField b_;
    PeriodicField V_;
    VectorField Da_;
    double gamma_;
    double beta_;
    double alpha_;
};

inline HamiltonianBundle eval_hamiltonian(const HamiltonianModel& model, std::size_t node, Vec2 p, double m)
{
    return model.evaluate(node, p, m);
}

/// Worst relative central-difference error of D_pH, D_mH, D2_ppH and D2_pmH
/// over seeded samples p in [-1.5, 1.5]^d, m in [0.5, 2].
/// Throws ParameterError unless step lies in [1e-7, 1e-3].
double verify_derivatives_fd(const HamiltonianModel& model, std::size_t samples, double step, std::uint64_t seed = 1);

struct HamiltonianSample {
    std::size_t node = 0;
    Vec2 p{};
    double m = 1.0;
};

struct MonotonicityReport {
    double min_eigenvalue = 0.0;
    HamiltonianSample witness;
};

/// Smallest eigenvalue of [[m D2_ppH, m D2_pmH / 2], [m D2_pmH^T / 2, -D_mH]] over the samples.
MonotonicityReport monotonicity_matrix_min_eig(const HamiltonianModel& model, std::span<const HamiltonianSample> samples);

/// Seeded samples: random nodes, p in [-p_range, p_range]^d, log-uniform m in [m_lo, m_hi].
std::vector<HamiltonianSample> random_samples(const Grid& grid, std::size_t count, std::uint64_t seed,
    double p_range, double m_lo, double m_hi);

struct ExponentProfile {
    double r = 0.0;
    double gamma = 0.0;
    double r1 = 0.0;
    double gamma1 = 0.0;
    int dim = 0;
    double r_conj = 0.0;
    double gamma_conj = 0.0;
    std::optional<double> gamma_star;
    /// Empty where the defining reciprocal is nonpositive.
    std::array<std::optional<double>, 4> q;

    bool growth_order = false;
    bool super_q = false;
    bool sobolev = false;

    bool q_defined() const;
    bool passes() const { return growth_order && super_q && sobolev && q_defined(); }
};

/// Throws ParameterError unless every exponent exceeds 1 and dim >= 1.
ExponentProfile check_exponent_profile(double r, double gamma, double r1, double gamma1, int dim);

} // namespace mfglab
