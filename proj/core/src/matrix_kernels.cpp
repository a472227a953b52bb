#include "descon/matrix_kernels.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <string>

namespace descon {

void ensure_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw InvalidMatrix(std::string(what) + ": matrix has NaN/Inf entries");
    }
}

double auto_rank_tolerance(Eigen::Index rows, Eigen::Index cols, double sigma_max) {
    return static_cast<double>(std::max(rows, cols)) * sigma_max * kRankEpsScale;
}

RankDecision rank_with_tolerance(const Matrix& m, double abs_tol) {
    ensure_finite(m, "rank_with_tolerance");
    RankDecision out;
    if (m.size() == 0) {
        out.singular_values = Vector(0);
        out.tolerance_used = std::max(abs_tol, 0.0);
        return out;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    out.singular_values = svd.singularValues();
    const double s1 = out.singular_values.size() ? out.singular_values(0) : 0.0;
    out.tolerance_used = abs_tol >= 0.0 ? abs_tol : auto_rank_tolerance(m.rows(), m.cols(), s1);
    out.rank = (out.singular_values.array() > out.tolerance_used).count();
    return out;
}

Matrix nullspace_basis(const Matrix& m, double abs_tol) {
    ensure_finite(m, "nullspace_basis");
    if (m.size() == 0) return Matrix::Identity(m.cols(), m.cols());
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const double s1 = sv.size() ? sv(0) : 0.0;
    const double tol = abs_tol >= 0.0 ? abs_tol : auto_rank_tolerance(m.rows(), m.cols(), s1);
    const Eigen::Index r = (sv.array() > tol).count();
    return svd.matrixV().rightCols(m.cols() - r);
}

Matrix range_basis(const Matrix& m, double abs_tol) {
    ensure_finite(m, "range_basis");
    if (m.size() == 0) return Matrix(m.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
    const Vector& sv = svd.singularValues();
    const double s1 = sv.size() ? sv(0) : 0.0;
    const double tol = abs_tol >= 0.0 ? abs_tol : auto_rank_tolerance(m.rows(), m.cols(), s1);
    const Eigen::Index r = (sv.array() > tol).count();
    return svd.matrixU().leftCols(r);
}

ComplexVector eigenvalues(const Matrix& m) {
    ensure_finite(m, "eigenvalues");
    if (m.rows() != m.cols()) throw InvalidMatrix("eigenvalues: matrix must be square");
    if (m.rows() == 0) return ComplexVector(0);
    Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw EigenFailure("eigenvalues: QR iteration did not converge within the sweep cap");
    }
    return solver.eigenvalues();
}

namespace {

Eigen::Index rank_of(const Matrix& m, double rank_tol) {
    return rank_with_tolerance(m, rank_tol).rank;
}

}  // namespace

CoreNilpotentDecomp core_nilpotent(const Matrix& d, double rank_tol) {
    ensure_finite(d, "core_nilpotent");
    if (d.rows() != d.cols()) throw InvalidMatrix("core_nilpotent: matrix must be square");
    const Eigen::Index n = d.rows();

    CoreNilpotentDecomp out;
    if (n == 0) {
        out.T_hat = Matrix(0, 0);
        out.E1_hat = Matrix(0, 0);
        out.E2_hat = Matrix(0, 0);
        return out;
    }

    // Index h = smallest k with rank(D^k) == rank(D^{k+1}); ranks strictly
    // decrease until they stagnate, so h <= n.
    int h = 0;
    Eigen::Index prev_rank = n;  // rank of D^0
    Matrix power = Matrix::Identity(n, n);
    Matrix d_to_h = power;
    for (int k = 1; k <= static_cast<int>(n) + 1; ++k) {
        power = power * d;
        const Eigen::Index rk = rank_of(power, rank_tol);
        if (rk == prev_rank) {
            h = k - 1;
            break;
        }
        prev_rank = rk;
        d_to_h = power;
    }

    if (h == 0) {
        out.T_hat = Matrix::Identity(n, n);
        out.E1_hat = d;
        out.E2_hat = Matrix(0, 0);
        out.n1 = n;
        out.n2 = 0;
        out.index_h = 0;
        Eigen::JacobiSVD<Matrix> svd(d);
        const auto& sv = svd.singularValues();
        out.core_condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                                     : std::numeric_limits<double>::infinity();
        return out;
    }

    const Matrix range = range_basis(d_to_h, rank_tol);
    const Matrix null = nullspace_basis(d_to_h, rank_tol);
    out.n1 = range.cols();
    out.n2 = null.cols();
    if (out.n1 + out.n2 != n) {
        throw DecompositionFailure("core_nilpotent: range/nullspace dimensions do not add up");
    }

    Matrix t_hat(n, n);
    t_hat << range, null;
    Eigen::PartialPivLU<Matrix> lu(t_hat);
    const Matrix blocks = lu.solve(d * t_hat);

    out.T_hat = t_hat;
    out.E1_hat = blocks.topLeftCorner(out.n1, out.n1);
    out.E2_hat = blocks.bottomRightCorner(out.n2, out.n2);
    out.index_h = h;

    const double scale = std::max(1.0, d.norm());
    double off = 0.0;
    if (out.n1 > 0 && out.n2 > 0) {
        off = std::max(blocks.topRightCorner(out.n1, out.n2).norm(),
                       blocks.bottomLeftCorner(out.n2, out.n1).norm());
    }
    out.off_diagonal_residual = off;
    if (off > kDecompositionTol * scale) {
        throw DecompositionFailure("core_nilpotent: off-diagonal residual " + std::to_string(off) +
                                   " exceeds tolerance (ill-conditioned split)");
    }

    if (out.n1 > 0) {
        Eigen::JacobiSVD<Matrix> svd(out.E1_hat);
        const auto& sv = svd.singularValues();
        const double smin = sv(sv.size() - 1);
        out.core_condition =
            smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
        if (smin <= auto_rank_tolerance(out.n1, out.n1, sv(0))) {
            throw DecompositionFailure("core_nilpotent: core block is numerically singular");
        }
    }

    // E2_hat^h must vanish; E2_hat^{h-1} must not (when the block exists).
    if (out.n2 > 0) {
        Matrix e2_power = Matrix::Identity(out.n2, out.n2);
        for (int k = 0; k < h - 1; ++k) e2_power = e2_power * out.E2_hat;
        const double prev_norm = e2_power.norm();
        e2_power = e2_power * out.E2_hat;
        if (e2_power.norm() > kDecompositionTol * scale) {
            throw DecompositionFailure("core_nilpotent: nilpotent block power does not vanish");
        }
        if (h > 1 && prev_norm <= kDecompositionTol * scale) {
            out.index_h = h;  // stagnation index stands; norm check is advisory
        }
    }
    return out;
}

FiniteSpectrum finite_generalized_eigenvalues(const Matrix& d, double s0, double rank_tol) {
    const CoreNilpotentDecomp cn = core_nilpotent(d, rank_tol);
    FiniteSpectrum out;
    out.infinite_count = cn.n2;
    if (cn.n1 == 0) {
        out.finite = ComplexVector(0);
        return out;
    }
    const ComplexVector mu = eigenvalues(cn.E1_hat);
    out.finite = ComplexVector(mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        out.finite(i) = s0 - 1.0 / mu(i);
    }
    return out;
}

}  // namespace descon
