#include "descon/stabilization.hpp"

#include <Eigen/Dense>
#include <string>

#include "descon/rng.hpp"

namespace descon {

Matrix truncate_to_rank(const Matrix& m, Eigen::Index rank) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vector sv = svd.singularValues();
    for (Eigen::Index i = rank; i < sv.size(); ++i) sv(i) = 0.0;
    return svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
}

SlowDataset data_decompose(const DataMatrices& d, const Experiment3Data& e3, double rank_tol) {
    const CoreNilpotentDecomp cn = core_nilpotent(d.D_E, rank_tol);
    if (cn.n1 == 0) {
        throw NothingToStabilize("data_decompose: no slow block (n1 = 0)");
    }

    SlowDataset sd;
    sd.P = cn.T_hat;
    sd.n1 = cn.n1;
    sd.n2 = cn.n2;
    sd.U_minus = e3.U_minus;

    Eigen::PartialPivLU<Matrix> lu(cn.T_hat);
    const Matrix wm = lu.solve(e3.X_minus);
    const Matrix wp = lu.solve(e3.X_plus);
    sd.Xs_minus = wm.topRows(cn.n1);
    sd.Xf_minus = wm.bottomRows(cn.n2);
    sd.Xs_plus = wp.topRows(cn.n1);
    sd.Xf_plus = wp.bottomRows(cn.n2);

    const Eigen::Index t_min = (sd.m() + 1) * sd.n1 + sd.m();
    if (sd.T() < t_min) {
        throw DegenerateData("data_decompose: window T = " + std::to_string(sd.T()) +
                             " is below the excitation bound " + std::to_string(t_min));
    }
    return sd;
}

RankCheck check_persistency(const SlowDataset& sd, double rel_tol) {
    Matrix stacked(sd.m() + sd.n1, sd.T());
    stacked << sd.U_minus, sd.Xs_minus;
    Eigen::JacobiSVD<Matrix> svd(stacked);
    RankCheck check;
    check.expected = sd.m() + sd.n1;
    check.decision.singular_values = svd.singularValues();
    const double s1 = check.decision.singular_values(0);
    check.decision.tolerance_used = rel_tol * s1;
    check.decision.rank =
        (check.decision.singular_values.array() > check.decision.tolerance_used).count();
    check.ok = check.decision.rank == check.expected;
    return check;
}

namespace {

struct ReducedProblem {
    Matrix Z1, Z2;     // 2n1 x r split into top/bottom
    Matrix Vsym;       // p x q basis of the symmetry subspace, p = r*n1
    Matrix Yt;         // 2n1 x T column-normalized stacked data
    Vector col_scale;  // per-column normalization absorbed into Phi
    Eigen::Index r = 0;
};

ReducedProblem reduce(const SlowDataset& sd) {
    const Eigen::Index n1 = sd.n1;
    const Eigen::Index T = sd.T();

    ReducedProblem red;
    red.col_scale = Vector::Ones(T);
    for (Eigen::Index j = 0; j < T; ++j) {
        double norm = std::sqrt(sd.U_minus.col(j).squaredNorm() + sd.Xs_minus.col(j).squaredNorm() +
                                sd.Xs_plus.col(j).squaredNorm());
        red.col_scale(j) = norm > 0.0 ? 1.0 / norm : 1.0;
    }

    red.Yt = Matrix(2 * n1, T);
    red.Yt.topRows(n1) = sd.Xs_minus * red.col_scale.asDiagonal();
    red.Yt.bottomRows(n1) = sd.Xs_plus * red.col_scale.asDiagonal();

    const Matrix Z = range_basis(red.Yt);
    red.r = Z.cols();
    red.Z1 = Z.topRows(n1);
    red.Z2 = Z.bottomRows(n1);

    // Symmetry of G = Z1*C as linear constraints on vec(C) (column-major).
    const Eigen::Index p = red.r * n1;
    const Eigen::Index rows = n1 * (n1 - 1) / 2;
    Matrix constraints = Matrix::Zero(rows, p);
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < n1; ++i) {
        for (Eigen::Index j = i + 1; j < n1; ++j, ++row) {
            for (Eigen::Index k = 0; k < red.r; ++k) {
                constraints(row, j * red.r + k) += red.Z1(i, k);
                constraints(row, i * red.r + k) -= red.Z1(j, k);
            }
        }
    }
    red.Vsym = rows > 0 ? nullspace_basis(constraints) : Matrix::Identity(p, p);
    return red;
}

std::vector<Matrix> certificate_basis(const ReducedProblem& red, Eigen::Index n1, double gamma) {
    std::vector<Matrix> basis;
    basis.reserve(red.Vsym.cols());
    for (Eigen::Index k = 0; k < red.Vsym.cols(); ++k) {
        const Matrix C = Eigen::Map<const Matrix>(red.Vsym.col(k).data(), red.r, n1);
        const Matrix G = red.Z1 * C;
        const Matrix H = (red.Z2 * C) / gamma;
        Matrix blk(2 * n1, 2 * n1);
        blk.topLeftCorner(n1, n1) = G;
        blk.topRightCorner(n1, n1) = H;
        blk.bottomLeftCorner(n1, n1) = H.transpose();
        blk.bottomRightCorner(n1, n1) = G;
        basis.push_back(0.5 * (blk + blk.transpose()));
    }
    return basis;
}

}  // namespace

Matrix solve_stabilizing_lmi(const SlowDataset& sd, const LmiOptions& opts) {
    const RankCheck pe = check_persistency(sd);
    if (!pe.ok) {
        throw DegenerateData("solve_stabilizing_lmi: excitation check failed (rank " +
                             std::to_string(pe.decision.rank) + " of " +
                             std::to_string(pe.expected) + ")");
    }

    const ReducedProblem red = reduce(sd);
    const Eigen::Index n1 = sd.n1;

    Vector best_z;
    bool found = false;
    for (double gamma : opts.rho_ladder) {
        const std::vector<Matrix> basis = certificate_basis(red, n1, gamma);
        const SdpResult res = max_margin_feasibility(basis, opts.sdp);
        if (!res.feasible) break;
        best_z = res.z;
        found = true;
    }
    if (!found) {
        throw LmiInfeasible(
            "solve_stabilizing_lmi: no certificate found within the solver budget");
    }

    // Recover Phi from the reduced coordinates, un-apply the column scaling,
    // and normalize the certificate scale.
    const Vector c_vec = red.Vsym * best_z;
    const Matrix C = Eigen::Map<const Matrix>(c_vec.data(), red.r, n1);
    const Matrix target = (Matrix(2 * n1, n1) << red.Z1 * C, red.Z2 * C).finished();
    const Matrix phi_tilde = red.Yt.completeOrthogonalDecomposition().solve(target);
    Matrix phi = red.col_scale.asDiagonal() * phi_tilde;

    Matrix g = sd.Xs_minus * phi;
    const double tr = g.trace();
    if (!(tr > 0.0)) {
        throw LmiInfeasible("solve_stabilizing_lmi: recovered certificate has nonpositive trace");
    }
    phi *= static_cast<double>(n1) / tr;

    // Re-verify the certificate verbatim on the raw data.
    g = sd.Xs_minus * phi;
    const Matrix h = sd.Xs_plus * phi;
    const double sym_res = (g - g.transpose()).norm() / std::max(1.0, g.norm());
    Matrix blk(2 * n1, 2 * n1);
    blk.topLeftCorner(n1, n1) = g;
    blk.topRightCorner(n1, n1) = h;
    blk.bottomLeftCorner(n1, n1) = h.transpose();
    blk.bottomRightCorner(n1, n1) = g;
    const Matrix sym_blk = 0.5 * (blk + blk.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym_blk);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (sym_res > opts.sym_tol || min_eig < opts.eps_pd) {
        throw LmiInfeasible("solve_stabilizing_lmi: certificate failed verification (sym " +
                            std::to_string(sym_res) + ", min eig " + std::to_string(min_eig) +
                            ")");
    }
    return phi;
}

StabilizationResult assemble_gain(const SlowDataset& sd, const Matrix& phi,
                                  const LmiOptions& opts) {
    const Eigen::Index n1 = sd.n1;
    const Matrix g = sd.Xs_minus * phi;
    const Matrix h = sd.Xs_plus * phi;

    Eigen::JacobiSVD<Matrix> gsvd(g);
    const auto& gsv = gsvd.singularValues();
    if (gsv(gsv.size() - 1) <= auto_rank_tolerance(n1, n1, gsv(0))) {
        throw DegenerateCertificate("assemble_gain: Xs_minus * Phi is numerically singular");
    }

    StabilizationResult out;
    out.Phi_s = phi;
    out.P = sd.P;
    out.n1 = n1;
    out.n2 = sd.n2;
    out.sym_residual = (g - g.transpose()).norm() / std::max(1.0, g.norm());

    const Matrix g_inv = g.inverse();
    out.K_s = sd.U_minus * phi * g_inv;
    const Matrix a_cl = h * g_inv;
    out.closed_loop_eigs = eigenvalues(a_cl);
    out.spectral_radius = out.closed_loop_eigs.size()
                              ? out.closed_loop_eigs.cwiseAbs().maxCoeff()
                              : 0.0;

    Matrix padded = Matrix::Zero(out.K_s.rows(), sd.n1 + sd.n2);
    padded.leftCols(n1) = out.K_s;
    out.K = sd.P.transpose().partialPivLu().solve(padded.transpose()).transpose();

    Matrix blk(2 * n1, 2 * n1);
    blk.topLeftCorner(n1, n1) = g;
    blk.topRightCorner(n1, n1) = h;
    blk.bottomLeftCorner(n1, n1) = h.transpose();
    blk.bottomRightCorner(n1, n1) = g;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (blk + blk.transpose()));
    out.lmi_min_eig = eig.eigenvalues().minCoeff();
    (void)opts;
    return out;
}

ClosedLoopCertificate certify_closed_loop(const DescriptorSystem& sys, const Matrix& K, int steps,
                                          std::uint64_t seed) {
    sys.validate();
    if (K.rows() != sys.m() || K.cols() != sys.n()) {
        throw InvalidMatrix("certify_closed_loop: gain has wrong dimensions");
    }
    const Matrix a_cl = sys.A + sys.B * K;
    const RegularityCertificate cert = pencil_regularity(sys.E, a_cl, 32, seed);
    if (!cert.regular) {
        throw NotRegular("certify_closed_loop: closed-loop pencil appears irregular");
    }

    ClosedLoopCertificate out;
    out.witness_shift = cert.witness_shift;
    const Matrix S = cert.witness_shift * sys.E - a_cl;
    const Matrix D = S.partialPivLu().solve(sys.E);
    const FiniteSpectrum spectrum = finite_generalized_eigenvalues(D, cert.witness_shift);
    out.pencil_eigs = spectrum.finite;
    out.max_modulus = spectrum.finite.size() ? spectrum.finite.cwiseAbs().maxCoeff() : 0.0;
    out.stable = out.max_modulus < 1.0;

    // Closed-loop rollout u_k = K x_k, i.e. the autonomous pencil (E, A+BK).
    // Simulate past `steps` so the sample at k = steps is interior (the
    // terminal fast draw never reaches it).
    DescriptorSystem closed{sys.E, a_cl, Matrix::Zero(sys.n(), 1)};
    const SlowFastForm sf = slow_fast_decompose(closed, cert.witness_shift);
    Rng rng(seed);
    const Vector x0_slow = rng.uniform_vector(sf.n1, -1.0, 1.0);
    const Eigen::Index window = steps + std::max(sf.index_h, 1);
    const Matrix zero_inputs = Matrix::Zero(1, window);
    const Trajectory traj = simulate(closed, sf, x0_slow, zero_inputs, 0.0, rng.raw());
    out.states = traj.states.leftCols(steps + 1);
    const double x0_norm = out.states.col(0).norm();
    out.decay_ratio = x0_norm > 0.0 ? out.states.col(steps).norm() / x0_norm : 0.0;
    return out;
}

}  // namespace descon
