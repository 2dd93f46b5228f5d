#include "mfglab/estimates.hpp"

#include "mfglab/errors.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace mfglab {

namespace {

void require_positive(const PeriodicField& m, const char* where)
{
    if (!(m.min() > 0.0)) {
        throw DomainError(std::string(where) + " needs a strictly positive density");
    }
}

double sigma_norms(const PeriodicField& f, int k)
{
    const PeriodicField lk = laplacian_power(f, k);
    return inner(f, f) + inner(lk, lk);
}

double sigma_norms(const VectorField& v, int k)
{
    double s = 0.0;
    for (int i = 0; i < v.dim(); ++i) {
        s += sigma_norms(v[i], k);
    }
    return s;
}

} // namespace

FirstOrderRow first_order_report(const PeriodicField& m, const PeriodicField& u, const RegularizationParams& params)
{
    require_same_grid(m.grid(), u.grid(), "first_order_report");
    require_positive(m, "first_order_report");
    FirstOrderRow r;
    r.entropy = integrate(m.map([](double s) { return s * std::log(s); }));
    r.log_integral = integrate(m.map([](double s) { return std::log(s); }));
    r.mass = integrate(m);
    r.kinetic = 0.5 * integrate((m + 1.0) * norm_sq(gradient(u)));
    const PeriodicField beta = m.map([&](double s) { return beta_sigma(s, params); });
    r.penalty = -integrate(beta);
    r.penalty_gap = integrate(beta * (m - params.sigma));
    r.sigma_terms = params.sigma * (sigma_norms(u, params.k) + sigma_norms(m, params.k));
    r.sqrt_m_h1 = h1_norm(m.map([](double s) { return std::sqrt(s); }));
    r.u_h1 = h1_norm(u);
    return r;
}

SecondOrderRow second_order_report(const PeriodicField& m, const PeriodicField& u, const RegularizationParams& params,
    const PeriodicField& diffusion)
{
    require_same_grid(m.grid(), u.grid(), "second_order_report");
    require_same_grid(m.grid(), diffusion.grid(), "second_order_report");
    require_positive(m, "second_order_report");
    const int d = m.grid().dim();
    SecondOrderRow r;
    const VectorField Du = gradient(u);
    const VectorField Dm = gradient(m);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const PeriodicField uij = partial(Du[i], j);
            r.hessian += integrate(m * uij * uij);
        }
    }
    const PeriodicField dm2 = norm_sq(Dm);
    r.fisher = 0.5 * integrate(dm2 / m);
    r.penalty_gradient = integrate(m.map([&](double s) { return beta_sigma_prime(s, params); }) * dm2);
    r.sigma_terms = params.sigma * (sigma_norms(Du, params.k) + sigma_norms(Dm, params.k));
    r.diffusion_gradient_sup = std::sqrt(norm_sq(gradient(diffusion)).max());
    r.diffusion_flag = r.diffusion_gradient_sup < 1.0;
    return r;
}

std::span<const std::string_view> estimate_columns()
{
    static constexpr std::array<std::string_view, 13> names{"entropy", "log_integral", "mass", "kinetic", "penalty",
        "penalty_gap", "sigma_terms_1", "sqrt_m_h1", "u_h1", "hessian", "fisher", "penalty_gradient", "sigma_terms_2"};
    return names;
}

std::vector<double> estimate_values(const EstimateRow& row)
{
    const FirstOrderRow& f = row.first;
    const SecondOrderRow& s = row.second;
    return {f.entropy, f.log_integral, f.mass, f.kinetic, f.penalty, f.penalty_gap, f.sigma_terms, f.sqrt_m_h1,
        f.u_h1, s.hessian, s.fisher, s.penalty_gradient, s.sigma_terms};
}

void EstimateReport::validate() const
{
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (double v : estimate_values(rows[i])) {
            if (!std::isfinite(v)) {
                throw ConfigError("estimate report row " + std::to_string(i) + " holds a non-finite value");
            }
        }
        if (i > 0 && !(rows[i].sigma < rows[i - 1].sigma)) {
            throw ConfigError("estimate report sigma column must be strictly decreasing");
        }
    }
}

UniformityVerdict uniformity_check(const EstimateReport& report)
{
    report.validate();
    UniformityVerdict out;
    if (report.rows.empty()) {
        return out;
    }
    const auto names = estimate_columns();
    const std::vector<double> first = estimate_values(report.rows.front());
    std::vector<double> worst(first.size(), 0.0);
    for (const EstimateRow& row : report.rows) {
        const std::vector<double> v = estimate_values(row);
        for (std::size_t c = 0; c < v.size(); ++c) {
            worst[c] = std::max(worst[c], std::abs(v[c]));
        }
    }
    for (std::size_t c = 0; c < first.size(); ++c) {
        if (worst[c] > 10.0 * std::abs(first[c]) + 1.0) {
            out.passes = false;
            out.violations.emplace_back(names[c]);
        }
    }
    return out;
}

double entropy_constant(double delta)
{
    if (!(delta > 0.0)) {
        throw ParameterError("entropy constant needs delta > 0");
    }
    // Maximize over t = log s; the maximizer is t = 1/delta - 1.
    auto negated = [delta](double t) { return -std::exp(t) * (1.0 - delta * t); };
    const double hi = std::max(10.0, 2.0 / delta + 10.0);
    const auto best = boost::math::tools::brent_find_minima(negated, -40.0, hi, std::numeric_limits<double>::digits);
    return -best.second;
}

EntropyCheck entropy_bound_check(const PeriodicField& m, double delta)
{
    const double c = entropy_constant(delta);
    require_positive(m, "entropy_bound_check");
    const double entropy = integrate(m.map([](double s) { return s * std::log(s); }));
    const double logs = integrate(m.map([](double s) { return std::log(s); }));
    return {std::max(integrate(m), logs), c + delta * entropy, c};
}

double mass_identity_residual(const PeriodicField& m, const PeriodicField& u, double sigma)
{
    require_same_grid(m.grid(), u.grid(), "mass_identity_residual");
    return std::abs(integrate(m) + sigma * integrate(u) - 1.0);
}

namespace {

double sqrt_difference(double a, double b) { return (a - b) / (std::sqrt(a) + std::sqrt(b)); }

} // namespace

double sqrt_distance_sq(const PeriodicField& a, const PeriodicField& b)
{
    require_same_grid(a.grid(), b.grid(), "sqrt_distance_sq");
    require_positive(a, "sqrt_distance_sq");
    require_positive(b, "sqrt_distance_sq");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = sqrt_difference(a[i], b[i]);
        s += d * d;
    }
    return s * a.grid().weight();
}

double elementary_inequality_gap(double a, double b)
{
    if (!(a > 0.0 && b > 0.0)) {
        throw DomainError("elementary inequality needs positive arguments");
    }
    const double d = a - b;
    const double root = std::sqrt(a) + std::sqrt(b);
    const double logs = std::abs(d) < 0.5 * b ? std::log1p(d / b) : std::log(a) - std::log(b);
    return d * logs - 4.0 * d * d / (root * root);
}

double min_elementary_gap(double lo, double hi, int per_axis)
{
    if (!(lo > 0.0 && hi > lo) || per_axis < 2) {
        throw ParameterError("elementary sweep needs 0 < lo < hi and at least two points per axis");
    }
    const double step = std::log(hi / lo) / (per_axis - 1);
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < per_axis; ++i) {
        const double a = lo * std::exp(step * i);
        for (int j = 0; j < per_axis; ++j) {
            worst = std::min(worst, elementary_inequality_gap(a, lo * std::exp(step * j)));
        }
    }
    return worst;
}

RateFit fit_loglog(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 3) {
        throw ConfigError("a rate fit needs at least three (sigma, error) points");
    }
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) {
            throw DomainError("log-log fit needs positive data");
        }
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (!(den > 0.0)) {
        throw DomainError("log-log fit needs distinct abscissae");
    }
    RateFit f;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = std::log(y[i]) - (f.intercept + f.slope * std::log(x[i]));
        ss += e * e;
    }
    f.residual = std::sqrt(ss / n);
    return f;
}

ConvergenceAnalysis convergence_rate_fit(std::span<const StageFields> stages, const FieldPair& reference)
{
    if (stages.size() < 3) {
        throw ConfigError("convergence analysis needs at least three stages");
    }
    require_positive(reference.density, "convergence_rate_fit reference");
    ConvergenceAnalysis out;
    out.elementary_ok = true;
    for (const StageFields& s : stages) {
        const PeriodicField& m = s.fields.density;
        out.sigma.push_back(s.sigma);
        const double err = sqrt_distance_sq(m, reference.density);
        out.density_error.push_back(err);
        out.value_error.push_back(h1_norm(s.fields.value - reference.value));
        double lhs = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double d = m[i] - reference.density[i];
            const double b = reference.density[i];
            lhs += d * (std::abs(d) < 0.5 * b ? std::log1p(d / b) : std::log(m[i]) - std::log(b));
        }
        lhs *= m.grid().weight();
        const double gap = lhs - 4.0 * err;
        out.elementary_gap.push_back(gap);
        out.elementary_ok = out.elementary_ok && gap >= -1e-10;
    }
    out.degenerate = std::any_of(out.density_error.begin(), out.density_error.end(),
        [](double e) { return !(e > std::numeric_limits<double>::min()); });
    if (out.degenerate) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        out.density_fit = {nan, nan, nan};
    } else {
        out.density_fit = fit_loglog(out.sigma, out.density_error);
    }
    out.value_error_decreasing = true;
    for (std::size_t i = 1; i < out.value_error.size(); ++i) {
        out.value_error_decreasing = out.value_error_decreasing && out.value_error[i] < out.value_error[i - 1];
    }
    return out;
}

} // namespace mfglab
