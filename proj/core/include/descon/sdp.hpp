#pragma once

#include <vector>

#include "descon/matrix_kernels.hpp"

namespace descon {

// Dense feasibility program over a matrix subspace:
//
//   maximize t  subject to  sum_k z_k basis[k] >= t*I,  ||z||_2 < 1
//
// solved by log-det barrier path following with damped Newton steps in
// (z, t). The unit ball pins the scale (the constraint is homogeneous in z).
// Sized for desk problems: matrix dimension tens, subspace dimension up to
// a few hundred.
struct SdpOptions {
    int stages = 9;             // barrier continuation rounds
    double eta0 = 1.0;          // initial objective weight
    double eta_growth = 20.0;   // multiplier per stage
    int newton_cap = 80;        // Newton iterations per stage
    double decrement_tol = 1e-10;
    double feasibility_floor = 1e-7;  // margin below this counts as "not found"
};

struct SdpResult {
    bool feasible = false;
    Vector z;
    double margin = -std::numeric_limits<double>::infinity();  // lambda_min at z
    int newton_steps = 0;
};

SdpResult max_margin_feasibility(const std::vector<Matrix>& basis, const SdpOptions& opts = {});

}  // namespace descon
