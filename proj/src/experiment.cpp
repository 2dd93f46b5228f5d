#include "mfglab/errors.hpp"
#include "mfglab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <random>

namespace mfglab {

namespace {

// Tolerances pinned by the acceptance criteria.
constexpr double mass_tol = 1e-9;
constexpr double rate_lo = 0.8;
constexpr double rate_hi = 1.2;
constexpr double elementary_tol = 1e-12;
constexpr double gap_tol = 1e-10;
constexpr double eig_match_tol = 1e-10;
constexpr double symmetry_tol = 1e-12;
constexpr double adjoint_tol = 1e-11;
constexpr double cancellation_tol = 1e-10;
constexpr double derivative_tol = 1e-6;

std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Verdict verdict(std::string name, bool ok, std::string detail)
{
    return {std::move(name), ok ? Outcome::pass : Outcome::fail, std::move(detail)};
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

FieldPair build_guess(const InitialGuess& g, const Grid& grid)
{
    return {g.density.build(grid), g.value.build(grid)};
}

struct PathOutcome {
    std::vector<StageRecord> stages;
    std::vector<StageFields> fields;
    bool complete = false;
    std::string failure;
};

PathOutcome run_path(const ExperimentConfig& c, const HamiltonianModel& model, std::span<const double> schedule,
    const FieldPair& initial, const std::string& label, bool estimates, const std::optional<FieldPair>& reference)
{
    const ContinuationResult cr = sigma_continuation(model, schedule, c.regularization(schedule.front()),
        c.controls, initial);
    PathOutcome out;
    out.complete = cr.complete;
    out.failure = cr.failure_reason;
    for (const StageResult& s : cr.stages) {
        StageRecord r;
        r.path = label;
        r.sigma = s.sigma;
        r.solver = s.report;
        const PeriodicField& m = s.solution.density;
        const PeriodicField& u = s.solution.value;
        r.mass_residual = mass_identity_residual(m, u, s.sigma);
        const bool positive = m.min() > 0.0;
        if (estimates && positive) {
            const RegularizationParams p = c.regularization(s.sigma);
            r.estimates = EstimateRow{s.sigma, first_order_report(m, u, p),
                second_order_report(m, u, p, model.diffusion())};
            for (double d : c.entropy_deltas) {
                r.entropy.push_back(entropy_bound_check(m, d));
            }
        }
        if (reference && positive) {
            r.sqrt_m_err_sq = sqrt_distance_sq(m, reference->density);
            r.u_h1_err = h1_norm(u - reference->value);
        }
        out.stages.push_back(std::move(r));
        out.fields.push_back({s.sigma, s.solution});
    }
    return out;
}

void add_solver_verdicts(RunRecord& rec, const PathOutcome& path)
{
    rec.verdicts.push_back(verdict("solver_convergence", path.complete,
        path.complete ? std::to_string(path.stages.size()) + " stages converged" : path.failure));
    double worst = 0.0;
    for (const StageRecord& s : path.stages) {
        if (s.solver.converged) {
            worst = std::max(worst, s.mass_residual);
        }
    }
    rec.verdicts.push_back(verdict("mass_identity", worst <= mass_tol, "max |int m + sigma int u - 1| = " + num(worst)));
}

void run_solve(const ExperimentConfig& c, RunRecord& rec, bool sweep)
{
    const Grid g = c.grid();
    const HamiltonianModel model = c.model.build(g);
    std::optional<FieldPair> reference;
    if (c.reference) {
        reference = build_guess(*c.reference, g);
    }
    const PathOutcome path = run_path(c, model, c.schedule, build_guess(c.initial, g), "main", sweep, reference);
    rec.stages = path.stages;
    add_solver_verdicts(rec, path);
    if (!sweep) {
        return;
    }

    EstimateReport report;
    bool entropy_ok = true;
    for (const StageRecord& s : path.stages) {
        if (s.solver.converged && s.estimates) {
            report.rows.push_back(*s.estimates);
            entropy_ok = entropy_ok && std::all_of(s.entropy.begin(), s.entropy.end(),
                [](const EntropyCheck& e) { return e.passes(); });
        }
    }
    if (report.rows.empty()) {
        rec.verdicts.push_back({"estimate_uniformity", Outcome::inconclusive, "no converged stage"});
    } else {
        const UniformityVerdict u = uniformity_check(report);
        std::string detail = u.passes ? "all functionals within 10x + 1 of the largest-sigma row" : "violations:";
        for (const auto& v : u.violations) {
            detail += " " + v;
        }
        rec.verdicts.push_back(verdict("estimate_uniformity", u.passes, detail));
        rec.verdicts.push_back(verdict("entropy_bound", entropy_ok, "deltas checked per converged stage"));
    }

    if (!reference) {
        return;
    }
    std::vector<StageFields> converged;
    for (std::size_t i = 0; i < path.stages.size(); ++i) {
        if (path.stages[i].solver.converged) {
            converged.push_back(path.fields[i]);
        }
    }
    if (converged.size() < 3) {
        rec.verdicts.push_back({"strong_convergence_rate", Outcome::inconclusive, "fewer than three converged stages"});
        return;
    }
    const ConvergenceAnalysis a = convergence_rate_fit(converged, *reference);
    rec.rate = a;
    if (a.degenerate) {
        rec.verdicts.push_back({"strong_convergence_rate", Outcome::inconclusive, "degenerate fit: an error vanished"});
    } else {
        const bool slope_ok = a.density_fit.slope >= rate_lo && a.density_fit.slope <= rate_hi;
        rec.verdicts.push_back(verdict("strong_convergence_rate", slope_ok && a.value_error_decreasing,
            "density slope " + num(a.density_fit.slope) + " (window [" + num(rate_lo) + ", " + num(rate_hi)
                + "]), u W^{1,2} error " + (a.value_error_decreasing ? "decreasing" : "not decreasing")));
    }
    const double sweep_gap = min_elementary_gap(1e-3, 1e3, 100);
    rec.verdicts.push_back(verdict("elementary_inequality", a.elementary_ok && sweep_gap >= -elementary_tol,
        "scalar sweep minimum " + num(sweep_gap) + ", stage audit " + (a.elementary_ok ? "ok" : "violated")));
}

void run_uniqueness(const ExperimentConfig& c, RunRecord& rec)
{
    const UniquenessResult u = uniqueness_experiment(c);
    rec.stages = u.limits;
    rec.details["distances"] = u.distances;
    rec.details["max_distance"] = u.max_distance;
    rec.details["weak_minimum"] = u.weak_minimum;
    std::string detail = "max pairwise distance " + num(u.max_distance) + " (tolerance " + num(c.uniqueness.tolerance)
        + ")";
    if (!u.note.empty()) {
        detail += "; " + u.note;
    }
    rec.verdicts.push_back({"weak_strong_uniqueness", u.verdict, detail});
}

void run_mollify_audit(const ExperimentConfig& c, RunRecord& rec)
{
    const MollifierAudit a = mollifier_audit(c.grid(), c.mollify, c.seed);
    rec.details["symmetry"] = a.symmetry;
    rec.details["adjointness"] = a.adjointness;
    rec.details["support_exact"] = a.support_exact;
    rec.details["cancellation"] = a.cancellation;
    rec.verdicts.push_back(verdict("mollifier_identities",
        a.symmetry <= symmetry_tol && a.adjointness <= adjoint_tol && a.support_exact,
        "symmetry " + num(a.symmetry) + ", adjointness " + num(a.adjointness) + ", support "
            + (a.support_exact ? "exact" : "leaks")));
    rec.verdicts.push_back(verdict("cancellation_identity", a.cancellation <= cancellation_tol,
        "worst relative residual " + num(a.cancellation)));
}

bool close(double a, double b) { return std::abs(a - b) <= eig_match_tol * std::max(1.0, std::abs(b)); }

void run_monotonicity_audit(const ExperimentConfig& c, RunRecord& rec)
{
    const MonotonicityAudit a = monotonicity_audit(c);
    rec.details["quadratic_log_gap"] = a.quadratic_log_gap;
    rec.details["power_gap"] = a.power_gap;
    rec.details["power_min_eig"] = a.power_min_eig;
    rec.details["power_predicted"] = a.power_predicted;
    rec.details["quadratic_log_min_eig"] = a.quadratic_log_min_eig;
    rec.details["quadratic_log_predicted"] = a.quadratic_log_predicted;
    rec.details["derivative_error"] = a.derivative_error;
    rec.details["jacobian_error"] = a.jacobian_error;
    rec.verdicts.push_back(verdict("monotonicity_gap", a.quadratic_log_gap >= -gap_tol && a.power_gap >= -gap_tol,
        "minimum gaps: quadratic_log " + num(a.quadratic_log_gap) + ", power " + num(a.power_gap)));
    rec.verdicts.push_back(verdict("matrix_positivity",
        a.power_min_eig > 0.0 && a.quadratic_log_min_eig > 0.0 && close(a.power_min_eig, a.power_predicted)
            && close(a.quadratic_log_min_eig, a.quadratic_log_predicted),
        "min eigenvalues: power " + num(a.power_min_eig) + " (closed form " + num(a.power_predicted)
            + "), quadratic_log " + num(a.quadratic_log_min_eig) + " (closed form " + num(a.quadratic_log_predicted)
            + ")"));
    rec.verdicts.push_back(verdict("derivative_audit",
        a.derivative_error <= derivative_tol && a.jacobian_error <= derivative_tol,
        "Hamiltonian derivatives " + num(a.derivative_error) + ", Newton Jacobian " + num(a.jacobian_error)));
}

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

void run_exponent_check(const ExperimentConfig& c, RunRecord& rec)
{
    const ExponentSpec& e = c.exponents;
    const ExponentProfile p = check_exponent_profile(e.r, e.gamma, e.r1.value_or(e.r), e.gamma1.value_or(e.gamma),
        e.dim);
    nlohmann::json q = nlohmann::json::array();
    for (const auto& v : p.q) {
        q.push_back(optional_json(v));
    }
    rec.details["q"] = q;
    rec.details["r_conj"] = p.r_conj;
    rec.details["gamma_conj"] = p.gamma_conj;
    rec.details["gamma_star"] = optional_json(p.gamma_star);
    rec.details["growth_order"] = p.growth_order;
    rec.details["super_q"] = p.super_q;
    rec.details["sobolev"] = p.sobolev;
    rec.verdicts.push_back(verdict("exponent_profile", p.passes(),
        std::string("growth ") + (p.growth_order ? "ok" : "fails") + ", superQ " + (p.super_q ? "ok" : "fails")
            + ", Sobolev " + (p.sobolev ? "ok" : "fails") + ", q " + (p.q_defined() ? "defined" : "undefined")));
}

} // namespace

std::string to_string(Outcome o)
{
    switch (o) {
    case Outcome::pass:
        return "pass";
    case Outcome::fail:
        return "fail";
    case Outcome::inconclusive:
        return "inconclusive";
    }
    return "unknown";
}

bool RunRecord::all_pass() const
{
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.outcome == Outcome::pass; });
}

int RunRecord::exit_status() const { return all_pass() ? 0 : 1; }

RunRecord run_experiment(const ExperimentConfig& config)
{
    config.validate();
    RunRecord rec;
    rec.kind = to_string(config.kind);
    rec.config_hash = config_hash(config);
    rec.seed = config.seed;
    rec.config = to_json(config);
    rec.started_at = utc_now();
    switch (config.kind) {
    case ExperimentKind::solve:
        run_solve(config, rec, false);
        break;
    case ExperimentKind::sweep:
        run_solve(config, rec, true);
        break;
    case ExperimentKind::uniqueness:
        run_uniqueness(config, rec);
        break;
    case ExperimentKind::mollify_audit:
        run_mollify_audit(config, rec);
        break;
    case ExperimentKind::monotonicity_audit:
        run_monotonicity_audit(config, rec);
        break;
    case ExperimentKind::exponent_check:
        run_exponent_check(config, rec);
        break;
    }
    rec.finished_at = utc_now();
    return rec;
}

UniquenessResult uniqueness_experiment(const ExperimentConfig& input)
{
    ExperimentConfig config = input;
    config.kind = ExperimentKind::uniqueness;
    config.validate();
    const Grid g = config.grid();
    const HamiltonianModel model = config.model.build(g);
    const UniquenessSpec& spec = config.uniqueness;

    UniquenessResult out;
    std::vector<FieldPair> limits;
    bool complete = true;
    for (std::size_t i = 0; i < spec.guesses.size(); ++i) {
        for (std::size_t j = 0; j < spec.schedules.size(); ++j) {
            const std::string label = "guess" + std::to_string(i) + "/schedule" + std::to_string(j);
            const PathOutcome p = run_path(config, model, spec.schedules[j], build_guess(spec.guesses[i], g), label,
                false, std::nullopt);
            if (!p.complete) {
                complete = false;
                out.note += (out.note.empty() ? "" : "; ") + label + " failed: " + p.failure;
            }
            if (!p.stages.empty()) {
                out.limits.push_back(p.stages.back());
            }
            limits.push_back(p.fields.back().fields);
        }
    }
    const std::size_t n = limits.size();
    out.distances.assign(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const PeriodicField dm = limits[a].density - limits[b].density;
            const PeriodicField du = limits[a].value - limits[b].value;
            const double d = std::sqrt(inner(dm, dm) + inner(du, du));
            out.distances[a * n + b] = out.distances[b * n + a] = d;
            out.max_distance = std::max(out.max_distance, d);
        }
    }
    const std::vector<FieldPair> battery = make_test_battery(g, spec.battery, config.seed);
    bool weak_ok = true;
    for (const FieldPair& limit : limits) {
        const WeakCheck w = weak_inequality_check(limit, battery, model);
        out.weak_minimum.push_back(w.min_value);
        weak_ok = weak_ok && w.passes(spec.tau);
    }
    if (!complete) {
        out.verdict = Outcome::inconclusive;
    } else {
        out.verdict = out.max_distance <= spec.tolerance && weak_ok ? Outcome::pass : Outcome::fail;
        if (!weak_ok) {
            out.note = "a limit fails the weak inequality at tau = " + num(spec.tau);
        }
    }
    return out;
}

MollifierAudit mollifier_audit(const Grid& grid, const MollifyAuditSpec& spec, std::uint64_t seed)
{
    spec.params.validate();
    std::mt19937_64 rng(seed);
    const int band = std::min(8, grid.n() / 2 - 1);
    MollifierAudit out;

    for (std::size_t i = 0; i < spec.draws; ++i) {
        const PeriodicField f = random_band_limited(grid, rng, band);
        const PeriodicField h = random_band_limited(grid, rng, band);
        const double scale = l2_norm(f) * l2_norm(h);
        out.symmetry = std::max(out.symmetry, std::abs(symmetry_pairing_residual(f, h, spec.params.delta)) / scale);
    }

    // Adjointness of the forward kernel and its reflection on compactly supported records.
    std::normal_distribution<double> nd;
    const double dt = spec.params.rho / 12.0;
    const std::size_t pad = 24;
    const std::size_t core = 100;
    for (std::size_t i = 0; i < spec.draws; ++i) {
        TimeSeries f{-static_cast<double>(pad) * dt, dt, {}};
        TimeSeries h = f;
        for (std::size_t t = 0; t < core + 2 * pad; ++t) {
            const bool inside = t >= pad && t < pad + core;
            f.values.push_back(inside ? nd(rng) : 0.0);
            h.values.push_back(inside ? nd(rng) : 0.0);
        }
        const TimeSeries back = one_sided_time_mollify(h, spec.params.rho, TimeDirection::backward, 1);
        const TimeSeries fwd = one_sided_time_mollify(f, spec.params.rho, TimeDirection::forward, 1);
        double lhs = 0.0, rhs = 0.0, scale = 0.0;
        for (std::size_t t = 0; t < f.values.size(); ++t) {
            lhs += f.values[t] * back.values[t] * dt;
            rhs += h.values[t] * fwd.values[t] * dt;
            scale += std::abs(f.values[t] * back.values[t] * dt);
        }
        out.adjointness = std::max(out.adjointness, std::abs(lhs - rhs) / scale);
    }

    // Forward mollification of a zero extension vanishes for t <= 0.
    const double T = 1.0;
    const std::size_t steps = static_cast<std::size_t>(std::ceil(T / dt));
    std::vector<PeriodicField> slices;
    for (std::size_t t = 0; t <= steps; ++t) {
        slices.push_back(random_band_limited(grid, rng, band) + 2.0);
    }
    const ZeroExtension ext = zero_extend_time(SpaceTimeField(T, std::move(slices)), T);
    out.support_exact = true;
    for (std::size_t node = 0; node < grid.size(); node += std::max<std::size_t>(1, grid.size() / 16)) {
        const TimeSeries s = one_sided_time_mollify(ext.series(node, 3.0 * spec.params.rho), spec.params.rho,
            TimeDirection::forward, 2);
        for (std::size_t t = 0; t < s.values.size(); ++t) {
            if (s.time(t) <= 0.0 && s.values[t] != 0.0) {
                out.support_exact = false;
            }
        }
    }

    const PeriodicField a = spec.coefficient.build(grid);
    std::uniform_real_distribution<double> width(0.05, 0.25);
    for (std::size_t i = 0; i < spec.draws; ++i) {
        const PeriodicField dm = random_band_limited(grid, rng, band);
        const PeriodicField du = random_band_limited(grid, rng, band);
        out.cancellation = std::max(out.cancellation, cancellation_residual(a, dm, du, width(rng)).relative());
    }
    return out;
}

double power_block_prediction(double gamma, double beta, int dim, std::span<const HamiltonianSample> samples)
{
    double lo = std::numeric_limits<double>::infinity();
    for (const HamiltonianSample& s : samples) {
        const double p2 = s.p[0] * s.p[0] + s.p[1] * s.p[1];
        const double base = 1.0 + p2;
        // Hessian of (1 + |p|^2)^(gamma/2) / gamma: radial and transverse eigenvalues.
        const double radial = std::pow(base, gamma / 2.0 - 2.0) * (1.0 + (gamma - 1.0) * p2);
        double hess = radial;
        if (dim == 2) {
            hess = std::min(hess, std::pow(base, gamma / 2.0 - 1.0));
        }
        lo = std::min({lo, s.m * hess, beta * std::pow(s.m, beta - 1.0)});
    }
    return lo;
}

double quadratic_log_block_prediction(std::span<const HamiltonianSample> samples)
{
    double lo = std::numeric_limits<double>::infinity();
    for (const HamiltonianSample& s : samples) {
        lo = std::min({lo, s.m, 1.0 / s.m});
    }
    return lo;
}

MonotonicityAudit monotonicity_audit(const ExperimentConfig& input)
{
    ExperimentConfig config = input;
    config.kind = ExperimentKind::monotonicity_audit;
    config.validate();
    const Grid g = config.grid();
    const MonotonicityAuditSpec& spec = config.monotonicity;
    const HamiltonianModel qlog = config.model.build(g);
    const HamiltonianModel power = HamiltonianModel::power(qlog.diffusion(), qlog.drift(), spec.power_gamma,
        spec.power_beta);

    MonotonicityAudit out;
    out.quadratic_log_gap = out.power_gap = std::numeric_limits<double>::infinity();
    const std::vector<FieldPair> battery = make_test_battery(g, 2 * spec.pairs, config.seed);
    for (std::size_t i = 0; i < spec.pairs; ++i) {
        const FieldPair& w1 = battery[2 * i];
        const FieldPair& w2 = battery[2 * i + 1];
        out.quadratic_log_gap = std::min(out.quadratic_log_gap, monotonicity_gap(w1, w2, qlog));
        out.power_gap = std::min(out.power_gap, monotonicity_gap(w1, w2, power));
    }

    const std::vector<HamiltonianSample> samples = random_samples(g, spec.samples, config.seed + 1, spec.p_range,
        spec.m_lo, spec.m_hi);
    out.power_min_eig = monotonicity_matrix_min_eig(power, samples).min_eigenvalue;
    out.power_predicted = power_block_prediction(spec.power_gamma, spec.power_beta, g.dim(), samples);
    out.quadratic_log_min_eig = monotonicity_matrix_min_eig(qlog, samples).min_eigenvalue;
    out.quadratic_log_predicted = quadratic_log_block_prediction(samples);

    const HamiltonianModel congestion = HamiltonianModel::congestion(qlog.diffusion(), qlog.drift(),
        config.model.gamma, config.model.alpha);
    for (const HamiltonianModel* m : {&qlog, &power, &congestion}) {
        out.derivative_error = std::max(out.derivative_error, verify_derivatives_fd(*m, 200, 1e-5, config.seed));
    }

    std::mt19937_64 rng(config.seed + 2);
    const int band = std::min(3, g.n() / 2 - 1);
    const RegularizationParams p = config.regularization(0.05);
    for (std::size_t i = 0; i < spec.jacobian_states; ++i) {
        PeriodicField m = random_band_limited(g, rng, band);
        m = (0.3 / m.sup_norm()) * m + 1.0;
        const FieldPair state{m, 0.3 * random_band_limited(g, rng, band)};
        const FieldPair dir{random_band_limited(g, rng, band), random_band_limited(g, rng, band)};
        out.jacobian_error = std::max(out.jacobian_error, jacobian_fd_consistency(state, dir, qlog, p));
    }
    return out;
}

} // namespace mfglab
