// Acceptance gate: one PASS/FAIL line per criterion. Tolerances and runtime
// limits are fixed here; `--criterion N` runs a single one.

#include "mfglab/errors.hpp"
#include "mfglab/estimates.hpp"
#include "mfglab/experiment.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

using namespace mfglab;

namespace {

struct Result {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

ExperimentConfig trivial_sweep()
{
    ExperimentConfig c;
    c.kind = ExperimentKind::sweep;
    c.seed = 1;
    c.dim = 1;
    c.n = 128;
    c.k = 3;
    c.q = 2.0;
    c.schedule = {1e-1, 1e-2, 1e-3, 1e-4};
    c.controls.tol = 1e-12;
    c.initial = {FieldSpec::constant(1.2), FieldSpec::constant(0.1)};
    c.reference = InitialGuess{FieldSpec::constant(1.0), FieldSpec::constant(0.0)};
    return c;
}

// V = 0.1 cos(2 pi x) with a = 1 + 0.1 cos(2 pi x), so sup |Da| = 0.2 pi < 1.
ExperimentConfig potential_sweep()
{
    ExperimentConfig c = trivial_sweep();
    c.reference.reset();
    c.model.potential = {0.0, {{{1, 0}, 0.1, 0.0}}};
    c.model.diffusion = {1.0, {{{1, 0}, 0.1, 0.0}}};
    c.controls.tol = 1e-10;
    return c;
}

const RunRecord& trivial_record()
{
    static const RunRecord r = run_experiment(trivial_sweep());
    return r;
}

const Verdict* find(const RunRecord& r, const std::string& name)
{
    for (const Verdict& v : r.verdicts) {
        if (v.name == name) {
            return &v;
        }
    }
    return nullptr;
}

Result criterion_1()
{
    const RunRecord& r = trivial_record();
    if (!r.rate) {
        return {false, "no rate fit (fewer than three converged stages)"};
    }
    const ConvergenceAnalysis& a = *r.rate;
    std::ostringstream d;
    d << "slope " << fmt(a.density_fit.slope) << " (required [0.8, 1.2]); errors";
    for (double e : a.density_error) {
        d << " " << fmt(e);
    }
    d << "; u W^{1,2} errors";
    for (double e : a.value_error) {
        d << " " << fmt(e);
    }
    const bool ok = !a.degenerate && a.density_fit.slope >= 0.8 && a.density_fit.slope <= 1.2
        && a.value_error_decreasing;
    return {ok, d.str()};
}

Result criterion_2()
{
    const RunRecord& r = trivial_record();
    double worst = 0.0;
    std::size_t converged = 0;
    for (const StageRecord& s : r.stages) {
        if (s.solver.converged) {
            ++converged;
            worst = std::max(worst, s.mass_residual);
        }
    }
    return {converged == r.stages.size() && worst <= 1e-9,
        std::to_string(converged) + "/" + std::to_string(r.stages.size()) + " stages converged, max residual "
            + fmt(worst)};
}

ExperimentConfig audit_config()
{
    ExperimentConfig c;
    c.kind = ExperimentKind::monotonicity_audit;
    c.seed = 3;
    c.dim = 1;
    c.n = 64;
    c.monotonicity.pairs = 1000;
    c.monotonicity.samples = 10000;
    c.monotonicity.power_gamma = 2.0;
    c.monotonicity.power_beta = 1.0;
    c.monotonicity.m_lo = 0.1;
    c.monotonicity.m_hi = 10.0;
    c.monotonicity.jacobian_states = 20;
    c.model.potential = {0.0, {{{1, 0}, 0.1, 0.0}}};
    return c;
}

const MonotonicityAudit& audit()
{
    static const MonotonicityAudit a = monotonicity_audit(audit_config());
    return a;
}

Result criterion_3()
{
    const MonotonicityAudit& a = audit();
    return {a.quadratic_log_gap >= -1e-10 && a.power_gap >= -1e-10,
        "1000 pairs each; minimum gap quadratic_log " + fmt(a.quadratic_log_gap) + ", power " + fmt(a.power_gap)};
}

Result criterion_4()
{
    const MonotonicityAudit& a = audit();
    auto match = [](double x, double y) { return std::abs(x - y) <= 1e-10; };
    return {a.power_min_eig > 0.0 && a.quadratic_log_min_eig > 0.0 && match(a.power_min_eig, a.power_predicted)
            && match(a.quadratic_log_min_eig, a.quadratic_log_predicted),
        "10^4 samples; power " + fmt(a.power_min_eig) + " vs " + fmt(a.power_predicted) + ", quadratic_log "
            + fmt(a.quadratic_log_min_eig) + " vs " + fmt(a.quadratic_log_predicted)};
}

MollifyAuditSpec mollify_spec()
{
    MollifyAuditSpec s;
    s.draws = 100;
    s.coefficient = {1.0, {{{1, 0}, 0.3, 0.0}}};
    return s;
}

Result criterion_5()
{
    const MollifierAudit a = mollifier_audit(make_grid(1, 128), mollify_spec(), 5);
    return {a.symmetry <= 1e-12 && a.adjointness <= 1e-11 && a.support_exact,
        "symmetry " + fmt(a.symmetry) + ", adjointness " + fmt(a.adjointness) + ", support "
            + (a.support_exact ? "exact" : "leaks")};
}

Result criterion_6()
{
    const MollifierAudit a = mollifier_audit(make_grid(1, 128), mollify_spec(), 6);
    return {a.cancellation <= 1e-10, "100 draws, worst relative residual " + fmt(a.cancellation)};
}

Result criterion_7()
{
    const RunRecord potential = run_experiment(potential_sweep());
    std::string detail;
    bool ok = true;
    for (const RunRecord* r : {&trivial_record(), &potential}) {
        const Verdict* u = find(*r, "estimate_uniformity");
        const Verdict* e = find(*r, "entropy_bound");
        const bool converged = find(*r, "solver_convergence")->outcome == mfglab::Outcome::pass;
        bool flags = true;
        for (const StageRecord& s : r->stages) {
            flags = flags && s.estimates && s.estimates->second.diffusion_flag;
        }
        const bool this_ok = converged && flags && u && u->outcome == mfglab::Outcome::pass && e
            && e->outcome == mfglab::Outcome::pass;
        ok = ok && this_ok;
        detail += (detail.empty() ? "" : "; ") + std::string(r == &potential ? "V config: " : "trivial: ")
            + (u ? u->detail : "no uniformity verdict") + (e ? ", entropy " + to_string(e->outcome) : "")
            + (flags ? "" : ", diffusion flag false");
    }
    return {ok, detail};
}

Result criterion_8()
{
    const double gap = min_elementary_gap(1e-3, 1e3, 100);
    return {gap >= -1e-12, "10^4-point sweep minimum " + fmt(gap)};
}

ExperimentConfig uniqueness_config(bool potential)
{
    ExperimentConfig c;
    c.kind = ExperimentKind::uniqueness;
    c.seed = potential ? 19 : 9;
    c.n = 128;
    c.controls.tol = 1e-11;
    if (potential) {
        c.model.potential = {0.0, {{{1, 0}, 0.1, 0.0}}};
    }
    c.uniqueness.guesses = {{FieldSpec::constant(1.2), FieldSpec::constant(0.1)},
        {FieldSpec::constant(0.8), FieldSpec::constant(-0.1)}};
    c.uniqueness.schedules = {{1e-1, 1e-2, 1e-3}, {3e-1, 3e-2, 1e-3}};
    c.uniqueness.tolerance = 1e-6;
    c.uniqueness.battery = 50;
    c.uniqueness.tau = 1e-4;
    return c;
}

Result criterion_9()
{
    bool ok = true;
    std::string detail;
    for (bool potential : {false, true}) {
        const UniquenessResult u = uniqueness_experiment(uniqueness_config(potential));
        double weak = std::numeric_limits<double>::infinity();
        for (double w : u.weak_minimum) {
            weak = std::min(weak, w);
        }
        ok = ok && u.verdict == mfglab::Outcome::pass;
        detail += (detail.empty() ? "" : "; ") + std::string(potential ? "V config" : "trivial") + ": distance "
            + fmt(u.max_distance) + ", weak minimum " + fmt(weak) + " " + to_string(u.verdict);
    }
    return {ok, detail};
}

Result criterion_10()
{
    const ExponentProfile a = check_exponent_profile(4.0, 4.0, 4.0, 4.0, 3);
    const std::array<double, 4> want{2.0, 2.0, 4.0, 4.0};
    bool q_ok = a.q_defined();
    for (std::size_t i = 0; i < 4 && q_ok; ++i) {
        q_ok = std::abs(*a.q[i] - want[i]) <= 1e-12;
    }
    bool critical = true;
    for (double r : {1.5, 1.1, 1.01, 1.0001}) {
        critical = critical && !check_exponent_profile(r, 2.0, r, 2.0, 3).super_q;
    }
    const ExponentProfile b = check_exponent_profile(4.0 / 3.0, 2.0, 4.0 / 3.0, 2.0, 4);
    const ExponentProfile below = check_exponent_profile(1.3, 2.0, 1.3, 2.0, 4);
    const bool star = b.gamma_star && std::abs(*b.gamma_star - 4.0) <= 1e-12 && b.sobolev && !below.sobolev;
    return {q_ok && a.super_q && critical && star,
        std::string("q table ") + (q_ok ? "(2,2,4,4)" : "wrong") + ", superQ " + (a.super_q ? "pass" : "fail")
            + "; r->1 with gamma=2 " + (critical ? "fails superQ" : "passes superQ") + "; gamma*="
            + (b.gamma_star ? fmt(*b.gamma_star) : "undefined") + ", threshold r>=4/3 "
            + (star ? "reproduced" : "not reproduced")};
}

Result criterion_11()
{
    double worst = 0.0;
    for (int d : {1, 2}) {
        const Grid g = make_grid(d, d == 1 ? 32 : 16);
        const PeriodicField a = PeriodicField::from_function(g,
            [](const Point& x) { return 1.0 + 0.2 * std::cos(2.0 * std::numbers::pi * x[0]); });
        const VectorField b = VectorField::zeros(g);
        for (const HamiltonianModel& m : {HamiltonianModel::power(a, b, 2.0, 1.0), HamiltonianModel::power(a, b, 3.0, 0.5),
                 HamiltonianModel::congestion(a, b, 2.0, 1.0), HamiltonianModel::congestion(a, b, 2.5, 0.5),
                 HamiltonianModel::quadratic_log(a, b, PeriodicField::constant(g, 0.3))}) {
            worst = std::max(worst, verify_derivatives_fd(m, 200, 1e-5, 11));
        }
    }
    const MonotonicityAudit& a = audit();
    return {worst <= 1e-6 && a.jacobian_error <= 1e-6,
        "Hamiltonian derivatives " + fmt(worst) + ", Newton Jacobian on 20 states " + fmt(a.jacobian_error)};
}

struct Criterion {
    std::function<Result()> run;
    double seconds;
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance criteria"};
    int only = 0;
    app.add_option("--criterion", only, "run a single criterion (1-11)")->check(CLI::Range(1, 11));
    CLI11_PARSE(app, argc, argv);

    // Criteria 2 and 4 share the runs of 1 and 3; their limits cover a cold start.
    const std::map<int, Criterion> criteria{{1, {criterion_1, 30}}, {2, {criterion_2, 30}}, {3, {criterion_3, 60}},
        {4, {criterion_4, 60}}, {5, {criterion_5, 10}}, {6, {criterion_6, 20}}, {7, {criterion_7, 60}},
        {8, {criterion_8, 10}}, {9, {criterion_9, 120}}, {10, {criterion_10, 10}}, {11, {criterion_11, 60}}};

    bool all = true;
    for (const auto& [id, c] : criteria) {
        if (only != 0 && id != only) {
            continue;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Result o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.seconds) {
            o.pass = false;
            o.detail += "; runtime " + fmt(secs) + " s exceeds " + fmt(c.seconds) + " s";
        }
        all = all && o.pass;
        std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << "  [" << fmt(secs)
                  << " s]\n";
    }
    return all ? 0 : 1;
}
