#pragma once

#include <cstdint>

#include "descon/matrix_kernels.hpp"

namespace descon {

// Ground-truth plant E x_{k+1} = A x_k + B u_k. Only the simulator and the
// oracle side of the test suite may look inside; the data-driven pipeline
// never sees these matrices.
struct DescriptorSystem {
    Matrix E;
    Matrix A;
    Matrix B;

    Eigen::Index n() const { return E.rows(); }
    Eigen::Index m() const { return B.cols(); }

    void validate() const;
};

struct RegularityCertificate {
    bool regular = false;
    double witness_shift = 0.0;
    double witness_condition = std::numeric_limits<double>::infinity();
};

// Condition cap for accepting a shift witness.
inline constexpr double kShiftConditionCap = 1.0e10;

// Samples `trials` real shifts in [-3, 3] and keeps the best-conditioned
// invertible sE - A. Deterministic given seed; a regular pencil fails all
// trials only on a measure-zero set of draws.
RegularityCertificate is_regular(const DescriptorSystem& sys, int trials = 16,
                                 std::uint64_t seed = 0x5EED);

// Same search over the bare pencil (E, A); used for closed-loop pencils.
RegularityCertificate pencil_regularity(const Matrix& E, const Matrix& A, int trials = 16,
                                        std::uint64_t seed = 0x5EED);

// Weierstrass-style slow-fast form: Q E P = diag(I, N_f), Q A P = diag(A_s, I),
// Q B = [B_s; B_f]. The slow block is an ordinary recursion; the fast block is
// nilpotent and anticausal.
struct SlowFastForm {
    Matrix Q;
    Matrix P;
    Matrix A_s;
    Matrix B_s;
    Matrix N_f;
    Matrix B_f;
    Eigen::Index n1 = 0;
    Eigen::Index n2 = 0;
    int index_h = 0;  // nilpotency index of N_f (0 when n2 == 0)
};

SlowFastForm slow_fast_decompose(const DescriptorSystem& sys, double s0,
                                 double rank_tol = kAutoTol);

// Time-indexed experiment record: states has one more column than inputs.
struct Trajectory {
    Matrix inputs;  // m x L
    Matrix states;  // n x (L+1)
    std::uint64_t noise_seed = 0;
    double noise_scale = 0.0;

    Eigen::Index steps() const { return inputs.cols(); }
};

// x0 = P * [x0_slow; x0_fast] with the fast part forced by the first
// index_h inputs: x0_fast = -sum_{i<h} N_f^i B_f u_i. Requires L >= index_h.
Vector consistent_initial_state(const SlowFastForm& sf, const Matrix& inputs,
                                const Vector& x0_slow);

// Simulates states x_0..x_L for inputs u_0..u_{L-1}. Slow part by forward
// recursion; fast part by backward recursion from a freely drawn terminal
// fast state (the finite-window solution set has exactly those n2 free
// parameters; tying them to hypothetical future inputs would force every
// input-free algebraic constraint to hold at x_L as well and degenerate the
// data matrices built from x_L). System noise d_k ~ U[-noise_scale,
// noise_scale]^n enters as E x_{k+1} = A x_k + B u_k + d_k, mapped through Q
// into the slow/fast channels. Draw order per step: noise columns first,
// then the terminal fast state.
Trajectory simulate(const DescriptorSystem& sys, const SlowFastForm& sf, const Vector& x0_slow,
                    const Matrix& inputs, double noise_scale, std::uint64_t seed);

// Max per-step residual ||E x_{k+1} - A x_k - B u_k|| over the window.
double step_residual(const DescriptorSystem& sys, const Trajectory& traj);

}  // namespace descon
