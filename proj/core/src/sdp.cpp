#include "descon/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

namespace descon {

namespace {

Matrix combine(const std::vector<Matrix>& basis, const Vector& z) {
    Matrix m = Matrix::Zero(basis[0].rows(), basis[0].cols());
    for (Eigen::Index k = 0; k < z.size(); ++k) m += z(k) * basis[k];
    return m;
}

// Barrier value; +inf when (z, t) leaves the domain.
double barrier(const std::vector<Matrix>& basis, const Vector& z, double t, double eta) {
    const double s = z.squaredNorm();
    if (s >= 1.0) return std::numeric_limits<double>::infinity();
    const Eigen::Index dim = basis[0].rows();
    Matrix slack = combine(basis, z) - t * Matrix::Identity(dim, dim);
    Eigen::LLT<Matrix> llt(slack);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) logdet += std::log(llt.matrixL()(i, i));
    return -eta * t - 2.0 * logdet - std::log(1.0 - s);
}

}  // namespace

SdpResult max_margin_feasibility(const std::vector<Matrix>& basis, const SdpOptions& opts) {
    SdpResult result;
    if (basis.empty()) return result;
    const Eigen::Index dim = basis[0].rows();
    const Eigen::Index q = static_cast<Eigen::Index>(basis.size());

    Vector z = Vector::Zero(q);
    double t = -1.0;  // M(0) - tI = I is strictly feasible

    double eta = opts.eta0;
    for (int stage = 0; stage < opts.stages; ++stage) {
        for (int it = 0; it < opts.newton_cap; ++it) {
            const Matrix slack = combine(basis, z) - t * Matrix::Identity(dim, dim);
            Eigen::LLT<Matrix> llt(slack);
            if (llt.info() != Eigen::Success) break;  // should not happen: steps stay feasible
            const Matrix w = llt.solve(Matrix::Identity(dim, dim));

            const double s = z.squaredNorm();
            const double ball = 1.0 - s;

            std::vector<Matrix> wm(q);
            for (Eigen::Index k = 0; k < q; ++k) wm[k] = w * basis[k];

            Vector grad(q + 1);
            for (Eigen::Index k = 0; k < q; ++k) {
                grad(k) = -wm[k].trace() + 2.0 * z(k) / ball;
            }
            grad(q) = -eta + w.trace();

            Matrix hess(q + 1, q + 1);
            for (Eigen::Index a = 0; a < q; ++a) {
                for (Eigen::Index b = a; b < q; ++b) {
                    const double v = wm[a].cwiseProduct(wm[b].transpose()).sum();
                    hess(a, b) = v;
                    hess(b, a) = v;
                }
            }
            const Matrix w2 = w * w;
            for (Eigen::Index a = 0; a < q; ++a) {
                const double v = -(w2.cwiseProduct(basis[a].transpose())).sum();
                hess(a, q) = v;
                hess(q, a) = v;
            }
            hess(q, q) = w2.trace();
            hess.topLeftCorner(q, q) += (2.0 / ball) * Matrix::Identity(q, q);
            hess.topLeftCorner(q, q) += (4.0 / (ball * ball)) * (z * z.transpose());

            Eigen::LDLT<Matrix> ldlt(hess);
            Vector step = ldlt.solve(-grad);
            if (!step.allFinite()) break;
            const double decrement = -grad.dot(step);
            ++result.newton_steps;

            const double f0 = barrier(basis, z, t, eta);
            double alpha = 1.0;
            Vector zn;
            double tn = t;
            while (alpha > 1e-12) {
                zn = z + alpha * step.head(q);
                tn = t + alpha * step(q);
                if (barrier(basis, zn, tn, eta) <= f0 - 0.25 * alpha * std::max(decrement, 0.0)) {
                    break;
                }
                alpha *= 0.5;
            }
            if (alpha <= 1e-12) break;
            z = zn;
            t = tn;
            if (decrement * 0.5 < opts.decrement_tol) break;
        }
        eta *= opts.eta_growth;
    }

    result.z = z;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(combine(basis, z));
    result.margin = eig.eigenvalues().minCoeff();
    result.feasible = result.margin > opts.feasibility_floor;
    return result;
}

}  // namespace descon
