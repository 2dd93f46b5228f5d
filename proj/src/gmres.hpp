#pragma once

// Restarted GMRES with modified Gram-Schmidt and Givens rotations.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>

namespace mfglab::detail {

struct GmresResult {
    Eigen::VectorXd x;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::string failure;
};

inline GmresResult gmres(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op, const Eigen::VectorXd& b,
    double rtol, double atol, int restart, int max_iter)
{
    const Eigen::Index n = b.size();
    GmresResult out{Eigen::VectorXd::Zero(n), 0, b.norm(), false, {}};
    const double target = std::max(rtol * out.residual, atol);
    if (out.residual <= target) {
        out.converged = true;
        return out;
    }
    const int m = std::max(1, restart);
    Eigen::MatrixXd V(n, m + 1);
    Eigen::MatrixXd Hs = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs(m), sn(m), g(m + 1);

    while (out.iterations < max_iter) {
        const Eigen::VectorXd r = b - op(out.x);
        double beta = r.norm();
        out.residual = beta;
        if (beta <= target) {
            out.converged = true;
            return out;
        }
        V.col(0) = r / beta;
        g.setZero();
        g(0) = beta;
        Hs.setZero();
        int j = 0;
        for (; j < m && out.iterations < max_iter; ++j) {
            ++out.iterations;
            Eigen::VectorXd w = op(V.col(j));
            for (int i = 0; i <= j; ++i) {
                Hs(i, j) = w.dot(V.col(i));
                w -= Hs(i, j) * V.col(i);
            }
            Hs(j + 1, j) = w.norm();
            if (!std::isfinite(Hs(j + 1, j))) {
                out.failure = "GMRES produced a non-finite Krylov vector";
                return out;
            }
            const bool lucky = Hs(j + 1, j) <= 1e-14 * beta;
            if (!lucky) {
                V.col(j + 1) = w / Hs(j + 1, j);
            }
            for (int i = 0; i < j; ++i) {
                const double t = cs(i) * Hs(i, j) + sn(i) * Hs(i + 1, j);
                Hs(i + 1, j) = -sn(i) * Hs(i, j) + cs(i) * Hs(i + 1, j);
                Hs(i, j) = t;
            }
            const double den = std::hypot(Hs(j, j), Hs(j + 1, j));
            if (den == 0.0) {
                out.failure = "GMRES breakdown: singular Hessenberg column";
                return out;
            }
            cs(j) = Hs(j, j) / den;
            sn(j) = Hs(j + 1, j) / den;
            Hs(j, j) = den;
            Hs(j + 1, j) = 0.0;
            g(j + 1) = -sn(j) * g(j);
            g(j) = cs(j) * g(j);
            out.residual = std::abs(g(j + 1));
            if (out.residual <= target || lucky) {
                ++j;
                break;
            }
        }
        const Eigen::VectorXd y = Hs.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
        out.x += V.leftCols(j) * y;
        if (out.residual <= target) {
            out.residual = (b - op(out.x)).norm();
            if (out.residual <= 10.0 * target) {
                out.converged = true;
                return out;
            }
        }
    }
    out.failure = "GMRES did not reach tolerance within " + std::to_string(max_iter) + " iterations";
    return out;
}

} // namespace mfglab::detail
