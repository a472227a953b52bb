#pragma once

#include "descon/model.hpp"

namespace descon {

// Single-loop RLC circuit in descriptor form with state [I, V_L, V_C, V_R]
// and input V_S; R = L = C = 1. Two dynamic equations (inductor flux,
// capacitor charge) and two algebraic ones (Ohm's law, the loop equation).
DescriptorSystem circuit_fixture();

struct RandomSystemOptions {
    Eigen::Index min_n = 2;
    Eigen::Index max_n = 6;
    Eigen::Index max_m = 3;
    double rho_min = 0.3;   // spectral radius target range for the slow block
    double rho_max = 1.2;
    bool force_controllable_slow = false;  // re-roll B_s until Kalman-full
    bool verdict_diversity = true;         // occasionally zero B_s or B_f
};

struct RandomSystem {
    DescriptorSystem sys;
    Eigen::Index n1 = 0;
    Eigen::Index n2 = 0;
    int index_h = 0;
    Matrix A_s, B_s, N_f, B_f;  // ground-truth pieces the system was built from
};

// Assembles a regular descriptor system from known slow-fast pieces through
// random orthogonal coordinate changes: E = Q0^T diag(I, N_f) P0^T, etc.
// Regular by construction and deterministic given the seed.
RandomSystem random_regular_system(std::uint64_t seed, const RandomSystemOptions& opts = {});

}  // namespace descon
