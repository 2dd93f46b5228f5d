#pragma once

namespace mfglab {

/// Interpolation profile used by beta_sigma on (sigma/2, sigma].
enum class BlendProfile { bump_step };

struct RegularizationParams {
    double sigma = 1e-2;
    int k = 3;
    double q = 2.0;
    BlendProfile blend = BlendProfile::bump_step;

    /// Smallest admissible k (2k - 4 > d/2 + 1) and q = d + 1.
    static RegularizationParams defaults(int dim, double sigma);

    /// Throws ParameterError unless sigma in (0, 1), 2k - 4 > d/2 + 1 and q > d.
    void validate(int dim) const;
};

/// S(t) = g(t) / (g(t) + g(1 - t)) with g(t) = exp(-1/t); S = 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t);
double smooth_step_derivative(double t);

/// -s^-q on (0, sigma/2], -s^-q S((sigma - s)/(sigma/2)) on (sigma/2, sigma], 0 above.
/// Throws DomainError for s <= 0.
double beta_sigma(double s, const RegularizationParams& params);
double beta_sigma_prime(double s, const RegularizationParams& params);

} // namespace mfglab
