#pragma once

#include "mfglab/mfg_model.hpp"
#include "mfglab/operators.hpp"
#include "mfglab/regularization.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mfglab {

/// Frechet derivative of A_sigma at a fixed state, applied matrix-free.
class JacobianOperator {
public:
    JacobianOperator(const FieldPair& state, const HamiltonianModel& model, const RegularizationParams& params);

    const Grid& grid() const noexcept { return m_.grid(); }
    ResidualPair apply(const FieldPair& direction) const;
    /// The sigma (I + lap^2k) block alone, acting diagonally on both rows.
    ResidualPair apply_regularization(const FieldPair& direction) const;

    /// Per-mode preconditioner sigma (1 + kappa^2k) + 1 + kappa with kappa = 4 pi^2 |xi|^2.
    const std::vector<double>& preconditioner_symbol() const noexcept { return symbol_; }
    /// Direction with spectra y^ / P^ (exact spectra).
    FieldPair precondition(const ResidualPair& y) const;

private:
    RegularizationParams params_;
    PeriodicField a_;
    PeriodicField m_;
    HamiltonianFields h_;
    PeriodicField beta_prime_;
    std::vector<double> symbol_;
};

struct Linearization {
    ResidualPair residual;
    JacobianOperator jacobian;
};

/// Throws DomainError unless the density is strictly positive.
Linearization assemble_residual_and_jacobian(const FieldPair& state, const HamiltonianModel& model,
    const RegularizationParams& params);

/// Relative L2 mismatch between the central difference of A_sigma along the normalized
/// `direction` and the Jacobian action.
double jacobian_fd_consistency(const FieldPair& state, const FieldPair& direction, const HamiltonianModel& model,
    const RegularizationParams& params, double step = 1e-6);

enum class LinearSolver { gmres, dense };

struct SolverControls {
    double tol = 1e-10;
    int max_iter = 50;
    /// Initial step length of every line search, in (0, 1].
    double damping = 1.0;
    LinearSolver linear = LinearSolver::gmres;
    bool audit_jacobian = false;
    int gmres_restart = 100;
    int gmres_max_iter = 1000;
    double gmres_rtol = 1e-12;
};

struct SolverReport {
    bool converged = false;
    int iterations = 0;
    double residual_sup = 0.0;
    std::vector<double> residual_history;
    std::vector<double> damping_history;
    std::vector<int> linear_iterations;
    std::vector<double> jacobian_audit;
    double positivity_margin = 0.0;
    double mass_identity_residual = 0.0;
    std::string failure_reason;
};

struct SolveResult {
    FieldPair solution;
    SolverReport report;
};

/// The mass-correct initial guess (1, 0).
FieldPair default_initial_guess(const Grid& grid);

/// Damped Newton for A_sigma(m, u) = 0 with the quadratic-log model.
/// Non-convergence is reported, not thrown. Throws DomainError for a
/// nonpositive initial density and ConfigError for other model families.
SolveResult newton_solve(const HamiltonianModel& model, const RegularizationParams& params, const FieldPair& initial,
    const SolverControls& controls);

struct StageResult {
    double sigma = 0.0;
    FieldPair solution;
    SolverReport report;
};

struct ContinuationResult {
    std::vector<StageResult> stages;
    bool complete = false;
    std::string failure_reason;
};

/// Throws ConfigError unless the schedule is nonempty, strictly decreasing and inside (0, 1).
void validate_schedule(std::span<const double> schedule);

/// Solve each sigma in turn, warm-starting from the previous stage; stops at the first failure.
ContinuationResult sigma_continuation(const HamiltonianModel& model, std::span<const double> schedule,
    const RegularizationParams& params, const SolverControls& controls,
    const std::optional<FieldPair>& initial = std::nullopt);

} // namespace mfglab
