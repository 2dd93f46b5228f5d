#include "mfglab/regularization.hpp"

#include "mfglab/errors.hpp"

#include <cmath>
#include <string>

namespace mfglab {

RegularizationParams RegularizationParams::defaults(int dim, double sigma)
{
    RegularizationParams p;
    p.sigma = sigma;
    p.k = 1;
    while (2.0 * p.k - 4.0 <= dim / 2.0 + 1.0) {
        ++p.k;
    }
    p.q = dim + 1.0;
    return p;
}

void RegularizationParams::validate(int dim) const
{
    if (!(sigma > 0.0 && sigma < 1.0)) {
        throw ParameterError("sigma must lie in (0, 1), got " + std::to_string(sigma));
    }
    if (!(2.0 * k - 4.0 > dim / 2.0 + 1.0)) {
        throw ParameterError("bilaplacian power k=" + std::to_string(k) + " violates 2k - 4 > d/2 + 1 for d="
            + std::to_string(dim));
    }
    if (!(q > dim)) {
        throw ParameterError("penalization exponent q must exceed the dimension");
    }
}

namespace {

double g(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

double g_prime(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }

void require_positive(double s)
{
    if (!(s > 0.0)) {
        throw DomainError("penalization argument must be positive, got " + std::to_string(s));
    }
}

} // namespace

double smooth_step(double t)
{
    if (t <= 0.0) {
        return 0.0;
    }
    if (t >= 1.0) {
        return 1.0;
    }
    const double a = g(t);
    return a / (a + g(1.0 - t));
}

double smooth_step_derivative(double t)
{
    if (t <= 0.0 || t >= 1.0) {
        return 0.0;
    }
    const double a = g(t);
    const double b = g(1.0 - t);
    const double den = a + b;
    return (g_prime(t) * b + a * g_prime(1.0 - t)) / (den * den);
}

double beta_sigma(double s, const RegularizationParams& params)
{
    require_positive(s);
    const double sigma = params.sigma;
    if (s > sigma) {
        return 0.0;
    }
    const double core = -std::pow(s, -params.q);
    if (s <= sigma / 2.0) {
        return core;
    }
    return core * smooth_step((sigma - s) / (sigma / 2.0));
}

double beta_sigma_prime(double s, const RegularizationParams& params)
{
    require_positive(s);
    const double sigma = params.sigma;
    if (s > sigma) {
        return 0.0;
    }
    const double q = params.q;
    if (s <= sigma / 2.0) {
        return q * std::pow(s, -q - 1.0);
    }
    const double t = (sigma - s) / (sigma / 2.0);
    return q * std::pow(s, -q - 1.0) * smooth_step(t) + (2.0 / sigma) * std::pow(s, -q) * smooth_step_derivative(t);
}

} // namespace mfglab
