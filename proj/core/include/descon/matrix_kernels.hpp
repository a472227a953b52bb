#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>

#include "descon/errors.hpp"

namespace descon {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

// Sentinel: pick the AUTO tolerance below.
inline constexpr double kAutoTol = -1.0;

// AUTO rank tolerance is max(rows, cols) * sigma_1 * kRankEpsScale. The
// factor of 1e3 over machine epsilon absorbs the rounding carried by data
// assembled through O(1e3)-conditioned solves while staying several orders
// below any singular value this library treats as structural.
inline constexpr double kRankEpsScale = 1.0e3 * std::numeric_limits<double>::epsilon();

// Rank verdicts always carry the full spectrum so near-threshold decisions
// can be audited downstream.
struct RankDecision {
    Eigen::Index rank = 0;
    Vector singular_values;  // nonincreasing
    double tolerance_used = 0.0;
};

void ensure_finite(const Matrix& m, const char* what);

double auto_rank_tolerance(Eigen::Index rows, Eigen::Index cols, double sigma_max);

RankDecision rank_with_tolerance(const Matrix& m, double abs_tol = kAutoTol);

// Orthonormal basis of the right nullspace / column space at tolerance
// `abs_tol`; an n x 0 matrix when the space is trivial.
Matrix nullspace_basis(const Matrix& m, double abs_tol = kAutoTol);
Matrix range_basis(const Matrix& m, double abs_tol = kAutoTol);

// All n eigenvalues with multiplicity (Hessenberg + shifted-QR backend;
// conjugate pairs adjacent). Throws EigenFailure if the iteration cap is hit.
ComplexVector eigenvalues(const Matrix& m);

// Similarity split of a square matrix into an invertible core and a
// nilpotent block: T_hat^-1 D T_hat = diag(E1_hat, E2_hat).
struct CoreNilpotentDecomp {
    Matrix T_hat;   // [orthonormal range basis of D^h | orthonormal nullspace basis of D^h]
    Matrix E1_hat;  // n1 x n1, invertible
    Matrix E2_hat;  // n2 x n2, nilpotent with index index_h
    Eigen::Index n1 = 0;
    Eigen::Index n2 = 0;
    int index_h = 0;  // smallest k with rank(D^k) == rank(D^{k+1}); 0 when D is invertible
    double off_diagonal_residual = 0.0;
    double core_condition = 1.0;  // cond_2(E1_hat)
};

// Residual cap for the block split (and for E2_hat^h being zero).
inline constexpr double kDecompositionTol = 1.0e-8;

CoreNilpotentDecomp core_nilpotent(const Matrix& d, double rank_tol = kAutoTol);

// Finite spectrum of a pencil (E, A) recovered from D = (s0 E - A)^-1 E:
// every eigenvalue mu of the invertible core of D maps to the finite
// generalized eigenvalue s = s0 - 1/mu; the nilpotent block carries the
// infinite ones. The split goes through core_nilpotent rather than a flat
// |mu| cutoff because eigenvalues of a perturbed nilpotent block of index h
// scatter at radius eps^(1/h), which no fixed threshold separates.
struct FiniteSpectrum {
    ComplexVector finite;
    Eigen::Index infinite_count = 0;
};

FiniteSpectrum finite_generalized_eigenvalues(const Matrix& d, double s0,
                                              double rank_tol = kAutoTol);

}  // namespace descon
