#include "mfglab/mfg_model.hpp"

#include "mfglab/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

namespace mfglab {

std::string to_string(Family f)
{
    switch (f) {
    case Family::power:
        return "power";
    case Family::congestion:
        return "congestion";
    case Family::quadratic_log:
        return "quadratic_log";
    }
    return "unknown";
}

Family family_from_string(const std::string& name)
{
    if (name == "power") {
        return Family::power;
    }
    if (name == "congestion") {
        return Family::congestion;
    }
    if (name == "quadratic_log") {
        return Family::quadratic_log;
    }
    throw ConfigError("unknown Hamiltonian family '" + name + "'");
}

HamiltonianModel::HamiltonianModel(Family family, PeriodicField a, VectorField b, PeriodicField V, double gamma,
    double beta, double alpha)
    : family_(family), a_(std::move(a)), b_(std::move(b)), V_(std::move(V)), Da_(gradient(a_)), gamma_(gamma),
      beta_(beta), alpha_(alpha)
{
    require_same_grid(a_.grid(), b_.grid(), "Hamiltonian drift");
    require_same_grid(a_.grid(), V_.grid(), "Hamiltonian potential");
    if (!(a_.min() > 0.0)) {
        throw DomainError("diffusion coefficient must be strictly positive");
    }
    if (!(gamma_ > 1.0)) {
        throw ParameterError("growth exponent gamma must exceed 1");
    }
    if (!(beta_ > 0.0)) {
        throw ParameterError("coupling exponent beta must be positive");
    }
    if (!(alpha_ > 0.0)) {
        throw ParameterError("congestion exponent alpha must be positive");
    }
}

HamiltonianModel HamiltonianModel::power(PeriodicField a, VectorField b, double gamma, double beta)
{
    PeriodicField V = PeriodicField::constant(a.grid(), 0.0);
    return HamiltonianModel(Family::power, std::move(a), std::move(b), std::move(V), gamma, beta, 1.0);
}

HamiltonianModel HamiltonianModel::congestion(PeriodicField a, VectorField b, double gamma, double alpha)
{
    PeriodicField V = PeriodicField::constant(a.grid(), 0.0);
    return HamiltonianModel(Family::congestion, std::move(a), std::move(b), std::move(V), gamma, 1.0, alpha);
}

HamiltonianModel HamiltonianModel::quadratic_log(PeriodicField a, VectorField b, PeriodicField V)
{
    return HamiltonianModel(Family::quadratic_log, std::move(a), std::move(b), std::move(V), 2.0, 1.0, 1.0);
}

void HamiltonianModel::check_density(double m) const
{
    if (!std::isfinite(m) || m < 0.0 || (m == 0.0 && !admits_zero_density())) {
        throw DomainError("density value " + std::to_string(m) + " is not admissible for the "
            + to_string(family_) + " family");
    }
    if (m == 0.0 && beta_ < 1.0) {
        throw DomainError("D_mH is unbounded at m = 0 for beta < 1");
    }
}

HamiltonianBundle HamiltonianModel::evaluate(std::size_t node, Vec2 p, double m) const
{
    check_density(m);
    const int d = grid().dim();
    if (d == 1) {
        p[1] = 0.0;
    }
    HamiltonianBundle out;
    const double p2 = p[0] * p[0] + p[1] * p[1];

    if (family_ == Family::quadratic_log) {
        const Vec2 da = Da_.at(node);
        const Vec2 b = b_.at(node);
        out.H = 0.5 * p2 + V_[node] - std::log(m);
        for (int i = 0; i < d; ++i) {
            out.H += (b[i] - da[i]) * p[i];
            out.Dp[i] = p[i] - da[i] + b[i];
            out.Dpp[i][i] = 1.0;
        }
        out.Dm = -1.0 / m;
        return out;
    }

    // Shared growth profile W = (1 + |p|^2)^(gamma/2).
    const double base = 1.0 + p2;
    const double W = std::pow(base, gamma_ / 2.0);
    const double W1 = std::pow(base, gamma_ / 2.0 - 1.0);
    const double scale = family_ == Family::congestion ? std::pow(m, -alpha_) : 1.0;
    for (int i = 0; i < d; ++i) {
        out.Dp[i] = scale * W1 * p[i];
        for (int j = 0; j < d; ++j) {
            out.Dpp[i][j] = scale * W1 * ((i == j ? 1.0 : 0.0) + (gamma_ - 2.0) * (p[i] * p[j]) / base);
        }
    }
    if (family_ == Family::power) {
        out.H = W / gamma_ - std::pow(m, beta_);
        out.Dm = m > 0.0 ? -beta_ * std::pow(m, beta_ - 1.0) : (beta_ == 1.0 ? -1.0 : 0.0);
    } else {
        out.H = scale * W / gamma_;
        out.Dm = -alpha_ * out.H / m;
        for (int i = 0; i < d; ++i) {
            out.Dpm[i] = -alpha_ * out.Dp[i] / m;
        }
    }
    return out;
}

std::vector<HamiltonianSample> random_samples(const Grid& grid, std::size_t count, std::uint64_t seed,
    double p_range, double m_lo, double m_hi)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> node(0, grid.size() - 1);
    std::uniform_real_distribution<double> pd(-p_range, p_range);
    std::uniform_real_distribution<double> lm(std::log(m_lo), std::log(m_hi));
    std::vector<HamiltonianSample> out(count);
    for (auto& s : out) {
        s.node = node(rng);
        s.p[0] = pd(rng);
        s.p[1] = grid.dim() == 2 ? pd(rng) : 0.0;
        s.m = std::exp(lm(rng));
    }
    return out;
}

double verify_derivatives_fd(const HamiltonianModel& model, std::size_t samples, double step, std::uint64_t seed)
{
    if (!(step >= 1e-7 && step <= 1e-3)) {
        throw ParameterError("finite-difference step must lie in [1e-7, 1e-3]");
    }
    const int d = model.grid().dim();
    double worst = 0.0;
    auto record = [&](double fd, double exact) {
        worst = std::max(worst, std::abs(fd - exact) / std::max(1.0, std::abs(exact)));
    };
    for (const auto& s : random_samples(model.grid(), samples, seed, 1.5, 0.5, 2.0)) {
        const HamiltonianBundle at = model.evaluate(s.node, s.p, s.m);
        for (int i = 0; i < d; ++i) {
            Vec2 pp = s.p, pm = s.p;
            pp[i] += step;
            pm[i] -= step;
            const HamiltonianBundle hp = model.evaluate(s.node, pp, s.m);
            const HamiltonianBundle hm = model.evaluate(s.node, pm, s.m);
            record((hp.H - hm.H) / (2.0 * step), at.Dp[i]);
            for (int j = 0; j < d; ++j) {
                record((hp.Dp[j] - hm.Dp[j]) / (2.0 * step), at.Dpp[i][j]);
            }
        }
        const HamiltonianBundle mp = model.evaluate(s.node, s.p, s.m + step);
        const HamiltonianBundle mm = model.evaluate(s.node, s.p, s.m - step);
        record((mp.H - mm.H) / (2.0 * step), at.Dm);
        for (int i = 0; i < d; ++i) {
            record((mp.Dp[i] - mm.Dp[i]) / (2.0 * step), at.Dpm[i]);
        }
    }
    return worst;
}

MonotonicityReport monotonicity_matrix_min_eig(const HamiltonianModel& model, std::span<const HamiltonianSample> samples)
{
    if (samples.empty()) {
        throw ParameterError("monotonicity check needs at least one sample");
    }
    const int d = model.grid().dim();
    MonotonicityReport report{std::numeric_limits<double>::infinity(), samples.front()};
    Eigen::MatrixXd M(d + 1, d + 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(d + 1);
    for (const auto& s : samples) {
        if (!(s.m > 0.0)) {
            throw DomainError("monotonicity samples need m > 0");
        }
        const HamiltonianBundle hb = model.evaluate(s.node, s.p, s.m);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                M(i, j) = s.m * hb.Dpp[i][j];
            }
            M(i, d) = M(d, i) = 0.5 * s.m * hb.Dpm[i];
        }
        M(d, d) = -hb.Dm;
        solver.compute(M, Eigen::EigenvaluesOnly);
        const double lo = solver.eigenvalues()(0);
        if (lo < report.min_eigenvalue) {
            report = {lo, s};
        }
    }
    return report;
}

bool ExponentProfile::q_defined() const
{
    return std::all_of(q.begin(), q.end(), [](const auto& v) { return v.has_value(); });
}

ExponentProfile check_exponent_profile(double r, double gamma, double r1, double gamma1, int dim)
{
    if (!(r > 1.0 && gamma > 1.0 && r1 > 1.0 && gamma1 > 1.0)) {
        throw ParameterError("integrability exponents must all exceed 1");
    }
    if (dim < 1) {
        throw ParameterError("dimension must be positive");
    }
    ExponentProfile e;
    e.r = r;
    e.gamma = gamma;
    e.r1 = r1;
    e.gamma1 = gamma1;
    e.dim = dim;
    e.r_conj = 1.0 / (1.0 - 1.0 / r);
    e.gamma_conj = 1.0 / (1.0 - 1.0 / gamma);

    const std::array<double, 4> inv{
        1.0 - 1.0 / r - 1.0 / gamma,
        1.0 - 2.0 / r,
        1.0 - 2.0 / r - 1.0 / gamma,
        1.0 - 1.0 / r - 2.0 / gamma,
    };
    for (std::size_t i = 0; i < inv.size(); ++i) {
        if (inv[i] > 0.0) {
            e.q[i] = 1.0 / inv[i];
        }
    }

    e.growth_order = r1 >= r && gamma1 >= gamma;
    e.super_q = 2.0 / r + 1.0 / gamma < 1.0 && 1.0 / r + 2.0 / gamma < 1.0;
    const double d = static_cast<double>(dim);
    if (gamma < d) {
        e.gamma_star = d * gamma / (d - gamma);
        e.sobolev = e.r_conj <= *e.gamma_star;
    } else {
        e.sobolev = true;
    }
    return e;
}

} // namespace mfglab
