#pragma once

#include <stdexcept>
#include <string>

namespace descon {

// Base class for every error this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A matrix argument contains NaN/Inf or has inconsistent dimensions.
struct InvalidMatrix : Error {
    using Error::Error;
};

// Eigenvalue iteration did not converge within the solver's sweep cap.
struct EigenFailure : Error {
    using Error::Error;
};

// Core-nilpotent or slow-fast split left an off-diagonal residual above
// tolerance (ill-conditioned invariant-subspace separation).
struct DecompositionFailure : Error {
    using Error::Error;
};

// The requested shift makes sE - A numerically singular.
struct BadShift : Error {
    using Error::Error;
};

// No sampled shift produced an invertible sE - A.
struct NotRegular : Error {
    using Error::Error;
};

// Fewer input steps than the nilpotency index requires.
struct InsufficientHorizon : Error {
    using Error::Error;
};

// Data matrices too ill-conditioned to invert, even after resampling.
struct DegenerateData : Error {
    using Error::Error;
};

// No usable gap in a singular-value spectrum; rank verdict refused.
struct AmbiguousSpectrum : Error {
    using Error::Error;
};

// The feasibility program found no certificate within its iteration budget.
// This reports failure to find, not a disproof of feasibility.
struct LmiInfeasible : Error {
    using Error::Error;
};

// A returned certificate has a numerically singular X_s_minus * Phi.
struct DegenerateCertificate : Error {
    using Error::Error;
};

// The slow subsystem is empty (n1 = 0); there is no gain to synthesize.
struct NothingToStabilize : Error {
    using Error::Error;
};

}  // namespace descon
