#include "mfglab/regularized_solver.hpp"

#include "gmres.hpp"
#include "mfglab/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mfglab {

namespace {

constexpr double armijo_c = 1e-4;
constexpr double step_floor = 1.0 / 1048576.0; // 2^-20
// Iterations without a 0.1% drop in the sup residual before declaring a round-off floor.
constexpr int stagnation_window = 5;

PeriodicField spectral(const PeriodicField& f)
{
    return f.has_exact_spectrum() ? f : PeriodicField::from_spectrum(f.grid(), f.spectrum());
}

PeriodicField regularization_term(const PeriodicField& f, const RegularizationParams& p)
{
    return p.sigma * (f + laplacian_power(f, 2 * p.k));
}

double pair_l2(const ResidualPair& r) { return std::sqrt(inner(r.hj, r.hj) + inner(r.fp, r.fp)); }

double pair_sup(const ResidualPair& r) { return std::max(r.hj.sup_norm(), r.fp.sup_norm()); }

Eigen::VectorXd to_vector(const ResidualPair& r)
{
    const auto n = static_cast<Eigen::Index>(r.hj.size());
    Eigen::VectorXd v(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = r.hj[static_cast<std::size_t>(i)];
        v(n + i) = r.fp[static_cast<std::size_t>(i)];
    }
    return v;
}

ResidualPair from_vector(const Grid& g, const Eigen::VectorXd& v)
{
    const auto n = static_cast<Eigen::Index>(g.size());
    std::vector<double> a(v.data(), v.data() + n);
    std::vector<double> b(v.data() + n, v.data() + 2 * n);
    return {PeriodicField(g, std::move(a)), PeriodicField(g, std::move(b))};
}

} // namespace

JacobianOperator::JacobianOperator(const FieldPair& state, const HamiltonianModel& model,
    const RegularizationParams& params)
    : params_(params), a_(model.diffusion()), m_(state.density),
      h_(evaluate_fields(model, gradient(state.value), state.density)),
      beta_prime_(state.density.map([&](double s) { return beta_sigma_prime(s, params); }))
{
    const Grid& g = m_.grid();
    const double c = 4.0 * std::numbers::pi * std::numbers::pi;
    symbol_.resize(g.spectrum_size());
    for (std::size_t mode = 0; mode < symbol_.size(); ++mode) {
        const WaveVector k = g.wavenumber(mode);
        const double kappa = c * static_cast<double>(k[0] * k[0] + k[1] * k[1]);
        symbol_[mode] = params_.sigma * (1.0 + std::pow(kappa, 2 * params_.k)) + 1.0 + kappa;
    }
}

ResidualPair JacobianOperator::apply_regularization(const FieldPair& direction) const
{
    return {regularization_term(direction.density, params_), regularization_term(direction.value, params_)};
}

ResidualPair JacobianOperator::apply(const FieldPair& direction) const
{
    const PeriodicField& dm = direction.density;
    const PeriodicField& du = direction.value;
    const Grid& g = m_.grid();
    const int d = g.dim();
    const VectorField Ddu = gradient(du);

    PeriodicField hj = (beta_prime_ - h_.Dm) * dm - du + a_ * laplacian_power(du, 1) - dot(h_.Dp, Ddu)
        + regularization_term(dm, params_);

    std::vector<PeriodicField> flux;
    for (int i = 0; i < d; ++i) {
        PeriodicField fi = dm * h_.Dp[i] + m_ * (h_.Dpm[i] * dm);
        for (int j = 0; j < d; ++j) {
            fi = fi + m_ * (h_.Dpp[static_cast<std::size_t>(i * d + j)] * Ddu[j]);
        }
        flux.push_back(std::move(fi));
    }
    PeriodicField fp = dm - laplacian_power(a_ * dm, 1) - divergence(VectorField(g, std::move(flux)))
        + regularization_term(du, params_);
    return {std::move(hj), std::move(fp)};
}

FieldPair JacobianOperator::precondition(const ResidualPair& y) const
{
    const Grid& g = m_.grid();
    Spectrum a = y.hj.spectrum();
    Spectrum b = y.fp.spectrum();
    for (std::size_t mode = 0; mode < symbol_.size(); ++mode) {
        a[mode] /= symbol_[mode];
        b[mode] /= symbol_[mode];
    }
    return {PeriodicField::from_spectrum(g, std::move(a)), PeriodicField::from_spectrum(g, std::move(b))};
}

Linearization assemble_residual_and_jacobian(const FieldPair& state, const HamiltonianModel& model,
    const RegularizationParams& params)
{
    ResidualPair residual = apply_A_sigma(state, model, params);
    return {std::move(residual), JacobianOperator(state, model, params)};
}

double jacobian_fd_consistency(const FieldPair& state, const FieldPair& direction, const HamiltonianModel& model,
    const RegularizationParams& params, double step)
{
    // Unit direction: the step then measures a fixed relative perturbation.
    const double norm = std::sqrt(inner(direction.density, direction.density) + inner(direction.value, direction.value));
    if (!(norm > 0.0)) {
        return 0.0;
    }
    const FieldPair unit = (1.0 / norm) * direction;
    const ResidualPair plus = apply_A_sigma(state + step * unit, model, params);
    const ResidualPair minus = apply_A_sigma(state - step * unit, model, params);
    const ResidualPair fd{(0.5 / step) * (plus.hj - minus.hj), (0.5 / step) * (plus.fp - minus.fp)};
    const ResidualPair exact = JacobianOperator(state, model, params).apply(unit);
    const double scale = pair_l2(exact);
    return pair_l2(fd - exact) / (scale > 0.0 ? scale : 1.0);
}

FieldPair default_initial_guess(const Grid& grid)
{
    return {PeriodicField::constant(grid, 1.0), PeriodicField::constant(grid, 0.0)};
}

namespace {

struct LinearSolve {
    FieldPair step;
    int iterations = 0;
    std::string failure;
};

// Solve J P^-1 y = rhs and return the Newton direction P^-1 y.
LinearSolve solve_linear(const JacobianOperator& J, const ResidualPair& rhs, const SolverControls& controls,
    double tol)
{
    const Grid& g = J.grid();
    auto op = [&](const Eigen::VectorXd& y) {
        return to_vector(J.apply(J.precondition(from_vector(g, y))));
    };
    const Eigen::VectorXd b = to_vector(rhs);
    if (controls.linear == LinearSolver::dense) {
        const Eigen::Index n = b.size();
        Eigen::MatrixXd M(n, n);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            e(j) = 1.0;
            M.col(j) = op(e);
            e(j) = 0.0;
        }
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
        if (!lu.isInvertible()) {
            return {default_initial_guess(g), 0, "dense Jacobian is singular"};
        }
        return {J.precondition(from_vector(g, lu.solve(b))), 1, {}};
    }
    const detail::GmresResult r = detail::gmres(op, b, controls.gmres_rtol, 1e-3 * tol, controls.gmres_restart,
        controls.gmres_max_iter);
    if (!r.converged) {
        return {default_initial_guess(g), r.iterations, r.failure};
    }
    return {J.precondition(from_vector(g, r.x)), r.iterations, {}};
}

void finish_report(SolverReport& report, const FieldPair& state, double sigma)
{
    report.positivity_margin = state.density.min();
    report.mass_identity_residual = std::abs(integrate(state.density) + sigma * integrate(state.value) - 1.0);
}

} // namespace

SolveResult newton_solve(const HamiltonianModel& model, const RegularizationParams& params, const FieldPair& initial,
    const SolverControls& controls)
{
    if (model.family() != Family::quadratic_log) {
        throw ConfigError("the regularized solver supports the quadratic_log family only");
    }
    const Grid& g = model.grid();
    require_same_grid(g, initial.density.grid(), "initial density");
    require_same_grid(g, initial.value.grid(), "initial value");
    params.validate(g.dim());
    if (!(controls.tol > 0.0) || controls.max_iter < 1 || !(controls.damping > 0.0 && controls.damping <= 1.0)) {
        throw ConfigError("solver controls need tol > 0, max_iter >= 1 and damping in (0, 1]");
    }
    if (!(initial.density.min() > 0.0)) {
        throw DomainError("initial density must be strictly positive");
    }

    FieldPair state{spectral(initial.density), spectral(initial.value)};
    SolverReport report;
    ResidualPair F = apply_A_sigma(state, model, params);
    for (int it = 0;; ++it) {
        report.iterations = it;
        report.residual_sup = pair_sup(F);
        report.residual_history.push_back(report.residual_sup);
        if (report.residual_sup <= controls.tol) {
            report.converged = true;
            break;
        }
        const auto& h = report.residual_history;
        if (h.size() > stagnation_window
            && h.back() > (1.0 - 1e-3) * h[h.size() - 1 - stagnation_window]) {
            report.failure_reason = "residual stagnated at " + std::to_string(report.residual_sup)
                + " above tol; round-off floor of this grid";
            break;
        }
        if (it == controls.max_iter) {
            report.failure_reason = "no convergence within " + std::to_string(controls.max_iter) + " Newton iterations";
            break;
        }
        const JacobianOperator J(state, model, params);
        const LinearSolve ls = solve_linear(J, ResidualPair{-1.0 * F.hj, -1.0 * F.fp}, controls, controls.tol);
        report.linear_iterations.push_back(ls.iterations);
        if (!ls.failure.empty()) {
            report.failure_reason = "linear solver: " + ls.failure;
            break;
        }
        if (controls.audit_jacobian) {
            report.jacobian_audit.push_back(jacobian_fd_consistency(state, ls.step, model, params));
        }

        const double f0 = pair_l2(F);
        double t = controls.damping;
        bool accepted = false;
        while (t >= step_floor) {
            FieldPair trial = state + t * ls.step;
            if (!(trial.density.min() > 0.0)) {
                t *= 0.5;
                continue;
            }
            ResidualPair Ft = apply_A_sigma(trial, model, params);
            if (pair_l2(Ft) <= (1.0 - armijo_c * t) * f0) {
                state = std::move(trial);
                F = std::move(Ft);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            report.failure_reason = "line search stalled below step 2^-20";
            break;
        }
        report.damping_history.push_back(t);
    }
    finish_report(report, state, params.sigma);
    return {std::move(state), std::move(report)};
}

void validate_schedule(std::span<const double> schedule)
{
    if (schedule.empty()) {
        throw ConfigError("sigma schedule is empty");
    }
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (!(schedule[i] > 0.0 && schedule[i] < 1.0)) {
            throw ConfigError("sigma schedule entries must lie in (0, 1)");
        }
        if (i > 0 && !(schedule[i] < schedule[i - 1])) {
            throw ConfigError("sigma schedule must be strictly decreasing");
        }
    }
}

ContinuationResult sigma_continuation(const HamiltonianModel& model, std::span<const double> schedule,
    const RegularizationParams& params, const SolverControls& controls, const std::optional<FieldPair>& initial)
{
    validate_schedule(schedule);
    ContinuationResult out;
    FieldPair current = initial ? *initial : default_initial_guess(model.grid());
    for (double sigma : schedule) {
        RegularizationParams p = params;
        p.sigma = sigma;
        SolveResult r = newton_solve(model, p, current, controls);
        const bool ok = r.report.converged;
        if (!ok) {
            out.failure_reason = "stage sigma=" + std::to_string(sigma) + ": " + r.report.failure_reason;
        }
        current = r.solution;
        out.stages.push_back({sigma, std::move(r.solution), std::move(r.report)});
        if (!ok) {
            return out;
        }
    }
    out.complete = true;
    return out;
}

} // namespace mfglab
