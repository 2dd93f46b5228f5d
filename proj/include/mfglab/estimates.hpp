#pragma once

#include "mfglab/operators.hpp"
#include "mfglab/regularization.hpp"
#include "mfglab/torus_grid.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mfglab {

struct FirstOrderRow {
    double entropy = 0.0;      // int m log m
    double log_integral = 0.0; // int log m
    double mass = 0.0;
    double kinetic = 0.0;      // int (m + 1)|Du|^2 / 2
    double penalty = 0.0;      // int -beta(m)
    double penalty_gap = 0.0;  // int beta(m)(m - sigma)
    double sigma_terms = 0.0;  // sigma (|u|^2 + |lap^k u|^2 + |m|^2 + |lap^k m|^2)
    double sqrt_m_h1 = 0.0;
    double u_h1 = 0.0;
};

struct SecondOrderRow {
    double hessian = 0.0;          // int m |D^2 u|^2, Frobenius
    double fisher = 0.0;           // 1/2 int |Dm|^2 / m
    double penalty_gradient = 0.0; // int beta'(m) |Dm|^2
    double sigma_terms = 0.0;      // sigma (|Du|^2 + |lap^k Du|^2 + |Dm|^2 + |lap^k Dm|^2)
    double diffusion_gradient_sup = 0.0;
    /// Hypothesis of the second-order bound: sup |Da| < 1.
    bool diffusion_flag = false;
};

/// Throws DomainError unless m > 0.
FirstOrderRow first_order_report(const PeriodicField& m, const PeriodicField& u, const RegularizationParams& params);
SecondOrderRow second_order_report(const PeriodicField& m, const PeriodicField& u, const RegularizationParams& params,
    const PeriodicField& diffusion);

struct EstimateRow {
    double sigma = 0.0;
    FirstOrderRow first;
    SecondOrderRow second;
};

/// Column names of the uniformity-checked functionals, in the order of estimate_values().
std::span<const std::string_view> estimate_columns();
std::vector<double> estimate_values(const EstimateRow& row);

struct EstimateReport {
    std::vector<EstimateRow> rows;

    /// Throws ConfigError if a value is non-finite or sigma is not strictly decreasing.
    void validate() const;
};

struct UniformityVerdict {
    bool passes = true;
    /// Columns where max |value| exceeds 10 |value at largest sigma| + 1.
    std::vector<std::string> violations;
};

UniformityVerdict uniformity_check(const EstimateReport& report);

struct EntropyCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double c_delta = 0.0;

    /// Equality cases (m = 1, delta = 1) sit at the maximizer, where C_delta is
    /// known only to round-off; hence the relative slack.
    bool passes() const { return lhs <= rhs + 1e-12 * std::max(1.0, std::abs(rhs)); }
};

/// sup_{s > 0} (s - delta s log s), found by 1-D maximization.
double entropy_constant(double delta);

/// lhs = max(int m, int log m), rhs = C_delta + delta int m log m.
/// ParameterError for delta <= 0, DomainError unless m > 0.
EntropyCheck entropy_bound_check(const PeriodicField& m, double delta);

/// |int m + sigma int u - 1|
double mass_identity_residual(const PeriodicField& m, const PeriodicField& u, double sigma);

/// ||sqrt(a) - sqrt(b)||^2_L2, cancellation-free.
double sqrt_distance_sq(const PeriodicField& a, const PeriodicField& b);

/// (a - b)(log a - log b) - 4 (sqrt a - sqrt b)^2, evaluated without cancellation in a - b.
double elementary_inequality_gap(double a, double b);

/// Minimum gap over a per_axis x per_axis log-spaced grid on [lo, hi]^2.
double min_elementary_gap(double lo, double hi, int per_axis);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// Root-mean-square residual of the log-log fit.
    double residual = 0.0;
};

/// Least squares of log y against log x. ConfigError for fewer than 3 points,
/// DomainError unless every value is positive.
RateFit fit_loglog(std::span<const double> x, std::span<const double> y);

struct StageFields {
    double sigma = 0.0;
    FieldPair fields;
};

struct ConvergenceAnalysis {
    std::vector<double> sigma;
    std::vector<double> density_error; // ||sqrt m_sigma - sqrt m*||^2
    std::vector<double> value_error;   // ||u_sigma - u*||_{W^{1,2}}
    RateFit density_fit;
    /// Some density error vanished, so no log-log fit exists.
    bool degenerate = false;
    bool value_error_decreasing = false;
    /// Per stage: int (m - m*)(log m - log m*) - 4 ||sqrt m - sqrt m*||^2.
    std::vector<double> elementary_gap;
    bool elementary_ok = false;
};

ConvergenceAnalysis convergence_rate_fit(std::span<const StageFields> stages, const FieldPair& reference);

} // namespace mfglab
