#include "descon/fixtures.hpp"

#include <Eigen/Dense>

#include "descon/rng.hpp"

namespace descon {

DescriptorSystem circuit_fixture() {
    DescriptorSystem sys;
    sys.E = Matrix{{1, 0, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}};
    sys.A = Matrix{{0, 1, 0, 0}, {1, 0, 0, 0}, {-1, 0, 0, 1}, {0, 1, 1, 1}};
    sys.B = Matrix{{0}, {0}, {0}, {-1}};
    return sys;
}

namespace {

Matrix random_orthogonal(Rng& rng, Eigen::Index n) {
    const Matrix g = rng.uniform_matrix(n, n, -1.0, 1.0);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (r(i, i) < 0) q.col(i) = -q.col(i);
    }
    return q;
}

bool slow_controllable(const Matrix& a, const Matrix& b) {
    const Eigen::Index n1 = a.rows();
    Matrix krylov(n1, n1 * b.cols());
    krylov.leftCols(b.cols()) = b;
    for (Eigen::Index k = 1; k < n1; ++k) {
        krylov.middleCols(k * b.cols(), b.cols()) = a * krylov.middleCols((k - 1) * b.cols(), b.cols());
    }
    return rank_with_tolerance(krylov).rank == n1;
}

}  // namespace

RandomSystem random_regular_system(std::uint64_t seed, const RandomSystemOptions& opts) {
    Rng rng(Rng::derive(seed, 0xF1D));

    RandomSystem out;
    const Eigen::Index span_n = opts.max_n - opts.min_n + 1;
    const Eigen::Index n = opts.min_n + static_cast<Eigen::Index>(rng.raw() % span_n);
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.raw() % opts.max_m);
    const Eigen::Index n1 = 1 + static_cast<Eigen::Index>(rng.raw() % n);
    const Eigen::Index n2 = n - n1;
    out.n1 = n1;
    out.n2 = n2;

    out.A_s = rng.uniform_matrix(n1, n1, -1.0, 1.0);
    const ComplexVector eigs = eigenvalues(out.A_s);
    const double rho = eigs.size() ? eigs.cwiseAbs().maxCoeff() : 0.0;
    const double target = rng.uniform(opts.rho_min, opts.rho_max);
    if (rho > 1e-12) out.A_s *= target / rho;

    out.N_f = Matrix::Zero(n2, n2);
    int h = n2 > 0 ? 1 : 0;
    for (Eigen::Index i = 0; i + 1 < n2; ++i) {
        if (rng.unit() < 0.6) out.N_f(i, i + 1) = rng.uniform(0.5, 1.5);
    }
    if (n2 > 0) {
        Matrix power = Matrix::Identity(n2, n2);
        h = 0;
        do {
            power = power * out.N_f;
            ++h;
        } while (power.norm() > 1e-14);
    }
    out.index_h = h;

    out.B_s = rng.uniform_matrix(n1, m, -1.0, 1.0);
    out.B_f = rng.uniform_matrix(n2, m, -1.0, 1.0);
    if (opts.force_controllable_slow) {
        for (int tries = 0; tries < 32 && !slow_controllable(out.A_s, out.B_s); ++tries) {
            out.B_s = rng.uniform_matrix(n1, m, -1.0, 1.0);
        }
    } else if (opts.verdict_diversity) {
        const double roll = rng.unit();
        if (roll < 0.25) {
            out.B_s.setZero();
        } else if (roll < 0.40 && n2 > 0) {
            out.B_f.setZero();
        }
    }

    const Matrix q0 = random_orthogonal(rng, n);
    const Matrix p0 = random_orthogonal(rng, n);

    Matrix ew = Matrix::Zero(n, n);
    ew.topLeftCorner(n1, n1) = Matrix::Identity(n1, n1);
    if (n2 > 0) ew.bottomRightCorner(n2, n2) = out.N_f;
    Matrix aw = Matrix::Zero(n, n);
    aw.topLeftCorner(n1, n1) = out.A_s;
    if (n2 > 0) aw.bottomRightCorner(n2, n2) = Matrix::Identity(n2, n2);
    Matrix bw(n, m);
    bw << out.B_s, out.B_f;

    // Q0 E P0 = diag(I, N_f) etc., with orthogonal Q0, P0: invert by transpose.
    out.sys.E = q0.transpose() * ew * p0.transpose();
    out.sys.A = q0.transpose() * aw * p0.transpose();
    out.sys.B = q0.transpose() * bw;
    return out;
}

}  // namespace descon
