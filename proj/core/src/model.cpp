#include "descon/model.hpp"

#include <Eigen/Dense>
#include <string>

#include "descon/rng.hpp"

namespace descon {

void DescriptorSystem::validate() const {
    if (E.rows() != E.cols() || A.rows() != A.cols() || E.rows() != A.rows() ||
        B.rows() != E.rows() || E.rows() < 1 || B.cols() < 1) {
        throw InvalidMatrix("DescriptorSystem: inconsistent dimensions");
    }
    ensure_finite(E, "DescriptorSystem.E");
    ensure_finite(A, "DescriptorSystem.A");
    ensure_finite(B, "DescriptorSystem.B");
}

namespace {

double shift_condition(const Matrix& E, const Matrix& A, double s) {
    Eigen::JacobiSVD<Matrix> svd(s * E - A);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / smin;
}

}  // namespace

RegularityCertificate pencil_regularity(const Matrix& E, const Matrix& A, int trials,
                                        std::uint64_t seed) {
    RegularityCertificate cert;
    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        const double s = rng.uniform(-3.0, 3.0);
        const double cond = shift_condition(E, A, s);
        if (cond < cert.witness_condition) {
            cert.witness_condition = cond;
            cert.witness_shift = s;
        }
    }
    cert.regular = cert.witness_condition < kShiftConditionCap;
    return cert;
}

RegularityCertificate is_regular(const DescriptorSystem& sys, int trials, std::uint64_t seed) {
    sys.validate();
    return pencil_regularity(sys.E, sys.A, trials, seed);
}

SlowFastForm slow_fast_decompose(const DescriptorSystem& sys, double s0, double rank_tol) {
    sys.validate();
    const Eigen::Index n = sys.n();
    const Matrix S = s0 * sys.E - sys.A;
    if (shift_condition(sys.E, sys.A, s0) >= kShiftConditionCap) {
        throw BadShift("slow_fast_decompose: s0 makes s0*E - A numerically singular");
    }
    Eigen::PartialPivLU<Matrix> lu(S);
    const Matrix D = lu.solve(sys.E);

    const CoreNilpotentDecomp cn = core_nilpotent(D, rank_tol);

    SlowFastForm sf;
    sf.n1 = cn.n1;
    sf.n2 = cn.n2;
    sf.index_h = cn.index_h;
    sf.P = cn.T_hat;

    // Q = diag(E1^-1, (s0 E2 - I)^-1) T^-1 (s0 E - A)^-1.
    Matrix blk = Matrix::Zero(n, n);
    if (cn.n1 > 0) {
        blk.topLeftCorner(cn.n1, cn.n1) = cn.E1_hat.inverse();
    }
    if (cn.n2 > 0) {
        const Matrix f = s0 * cn.E2_hat - Matrix::Identity(cn.n2, cn.n2);
        blk.bottomRightCorner(cn.n2, cn.n2) = f.inverse();
    }
    const Matrix t_inv = cn.T_hat.inverse();
    sf.Q = blk * t_inv * lu.inverse();

    sf.A_s = cn.n1 > 0 ? Matrix(s0 * Matrix::Identity(cn.n1, cn.n1) - cn.E1_hat.inverse())
                       : Matrix(0, 0);
    sf.N_f = cn.n2 > 0
                 ? Matrix((s0 * cn.E2_hat - Matrix::Identity(cn.n2, cn.n2)).inverse() * cn.E2_hat)
                 : Matrix(0, 0);
    const Matrix qb = sf.Q * sys.B;
    sf.B_s = qb.topRows(cn.n1);
    sf.B_f = qb.bottomRows(cn.n2);

    // The form must reproduce diag(I, N_f), diag(A_s, I), [B_s; B_f].
    Matrix ew = Matrix::Zero(n, n);
    ew.topLeftCorner(sf.n1, sf.n1) = Matrix::Identity(sf.n1, sf.n1);
    if (sf.n2 > 0) ew.bottomRightCorner(sf.n2, sf.n2) = sf.N_f;
    Matrix aw = Matrix::Zero(n, n);
    if (sf.n1 > 0) aw.topLeftCorner(sf.n1, sf.n1) = sf.A_s;
    if (sf.n2 > 0) aw.bottomRightCorner(sf.n2, sf.n2) = Matrix::Identity(sf.n2, sf.n2);
    const double scale = std::max({1.0, sys.E.norm(), sys.A.norm()});
    const double res = std::max((sf.Q * sys.E * sf.P - ew).norm(), (sf.Q * sys.A * sf.P - aw).norm());
    if (res > kDecompositionTol * scale * 10.0) {
        throw DecompositionFailure("slow_fast_decompose: form residual " + std::to_string(res));
    }
    return sf;
}

Vector consistent_initial_state(const SlowFastForm& sf, const Matrix& inputs,
                                const Vector& x0_slow) {
    if (inputs.cols() < sf.index_h) {
        throw InsufficientHorizon("consistent_initial_state: need at least index_h inputs");
    }
    if (x0_slow.size() != sf.n1) {
        throw InvalidMatrix("consistent_initial_state: x0_slow has wrong dimension");
    }
    Vector xf = Vector::Zero(sf.n2);
    if (sf.n2 > 0) {
        Matrix nf_pow = Matrix::Identity(sf.n2, sf.n2);
        for (int i = 0; i < sf.index_h; ++i) {
            xf -= nf_pow * (sf.B_f * inputs.col(i));
            nf_pow = nf_pow * sf.N_f;
        }
    }
    Vector stacked(sf.n1 + sf.n2);
    stacked << x0_slow, xf;
    return sf.P * stacked;
}

Trajectory simulate(const DescriptorSystem& sys, const SlowFastForm& sf, const Vector& x0_slow,
                    const Matrix& inputs, double noise_scale, std::uint64_t seed) {
    sys.validate();
    ensure_finite(inputs, "simulate.inputs");
    if (inputs.rows() != sys.m()) throw InvalidMatrix("simulate: input dimension mismatch");
    if (inputs.cols() < 1) throw InsufficientHorizon("simulate: need at least one input step");
    if (x0_slow.size() != sf.n1) throw InvalidMatrix("simulate: x0_slow has wrong dimension");

    const Eigen::Index L = inputs.cols();
    const Eigen::Index n = sys.n();
    Rng rng(seed);

    Matrix noise = Matrix::Zero(n, L);
    if (noise_scale > 0.0) {
        noise = rng.uniform_matrix(n, L, -noise_scale, noise_scale);
    }
    const Matrix qd = sf.Q * noise;

    Matrix xs(sf.n1, L + 1);
    if (sf.n1 > 0) {
        xs.col(0) = x0_slow;
        for (Eigen::Index k = 0; k < L; ++k) {
            xs.col(k + 1) = sf.A_s * xs.col(k) + sf.B_s * inputs.col(k) + qd.col(k).head(sf.n1);
        }
    }

    Matrix xf(sf.n2, L + 1);
    if (sf.n2 > 0) {
        xf.col(L) = rng.uniform_vector(sf.n2, -1.0, 1.0);
        for (Eigen::Index k = L - 1; k >= 0; --k) {
            xf.col(k) = sf.N_f * xf.col(k + 1) - sf.B_f * inputs.col(k) - qd.col(k).tail(sf.n2);
        }
    }

    Matrix stacked(n, L + 1);
    if (sf.n1 > 0) stacked.topRows(sf.n1) = xs;
    if (sf.n2 > 0) stacked.bottomRows(sf.n2) = xf;

    Trajectory traj;
    traj.inputs = inputs;
    traj.states = sf.P * stacked;
    traj.noise_seed = seed;
    traj.noise_scale = noise_scale;
    return traj;
}

double step_residual(const DescriptorSystem& sys, const Trajectory& traj) {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < traj.steps(); ++k) {
        const Vector r = sys.E * traj.states.col(k + 1) - sys.A * traj.states.col(k) -
                         sys.B * traj.inputs.col(k);
        worst = std::max(worst, r.norm());
    }
    return worst;
}

}  // namespace descon
