#pragma once

#include "descon/analysis.hpp"
#include "descon/sdp.hpp"

namespace descon {

// Experiment-3 data split into slow/fast rows by P^-1, with P = T_hat from
// the core-nilpotent split of the data matrix D_E.
struct SlowDataset {
    Matrix U_minus;   // m x T
    Matrix Xs_minus;  // n1 x T
    Matrix Xs_plus;   // n1 x T
    Matrix Xf_minus;  // n2 x T (diagnostics only; the gain never uses them)
    Matrix Xf_plus;   // n2 x T
    Matrix P;         // n x n
    Eigen::Index n1 = 0;
    Eigen::Index n2 = 0;

    Eigen::Index T() const { return U_minus.cols(); }
    Eigen::Index m() const { return U_minus.rows(); }
};

struct LmiOptions {
    // Required minimum eigenvalue of the certificate block matrix after the
    // returned Phi is normalized to trace(Xs_minus * Phi) = n1.
    double eps_pd = 1.0e-6;
    // Relative cap on ||G - G^T|| / max(1, ||G||).
    double sym_tol = 1.0e-8;
    // Contraction targets: the solver walks down this ladder while feasible,
    // which certifies rho(A_cl) below the last feasible entry. Every tighter
    // solution still satisfies the ladder-head inequality with margin.
    std::vector<double> rho_ladder{1.0, 0.9, 0.8, 0.7};
    SdpOptions sdp;
};

struct StabilizationResult {
    Matrix Phi_s;  // T x n1 certificate variable
    Matrix K_s;    // m x n1 slow gain
    Matrix K;      // m x n full gain, [K_s 0] P^-1
    Matrix P;
    Eigen::Index n1 = 0;
    Eigen::Index n2 = 0;
    double lmi_min_eig = 0.0;
    double sym_residual = 0.0;
    double spectral_radius = 0.0;
    ComplexVector closed_loop_eigs;  // eigenvalues of Xs_plus Phi (Xs_minus Phi)^-1
};

// Zeroes every singular value beyond the first `rank` (threshold-mode
// denoising of D_E ahead of the core-nilpotent split).
Matrix truncate_to_rank(const Matrix& m, Eigen::Index rank);

SlowDataset data_decompose(const DataMatrices& d, const Experiment3Data& e3,
                           double rank_tol = kAutoTol);

// Full-row-rank check of [U_minus; Xs_minus] (the excitation condition on
// the slow dataset).
RankCheck check_persistency(const SlowDataset& sd, double rel_tol = kAnalysisRankRel);

// Finds Phi with Xs_minus*Phi symmetric positive definite and
// [[Xs_minus*Phi, Xs_plus*Phi], [(Xs_plus*Phi)^T, Xs_minus*Phi]] >= eps_pd*I.
// The search runs in the reduced pair subspace {(Xs_minus*Phi, Xs_plus*Phi)}
// (dimension <= 2*n1^2) with input columns jointly normalized; both tricks
// are absorbed back into Phi, and the returned certificate is re-verified
// verbatim on the raw data. Throws LmiInfeasible when no certificate is
// found within the budget (failure to find, not a disproof).
Matrix solve_stabilizing_lmi(const SlowDataset& sd, const LmiOptions& opts = {});

StabilizationResult assemble_gain(const SlowDataset& sd, const Matrix& Phi_sfa,
                                  const LmiOptions& opts = {});

struct ClosedLoopCertificate {
    ComplexVector pencil_eigs;  // finite generalized eigenvalues of (E, A + BK)
    double max_modulus = 0.0;
    bool stable = false;
    double decay_ratio = 0.0;  // ||x_steps|| / ||x_0|| in closed-loop simulation
    double witness_shift = 0.0;
    Matrix states;  // n x (steps+1) closed-loop trajectory
};

// Oracle-side verification: needs the true system.
ClosedLoopCertificate certify_closed_loop(const DescriptorSystem& sys, const Matrix& K,
                                          int steps = 200, std::uint64_t seed = 0xC10);

}  // namespace descon
