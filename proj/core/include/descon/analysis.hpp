#pragma once

#include "descon/experiments.hpp"

namespace descon {

enum class TypeKind { Normal, Descriptor };
enum class RankMethod { ExactRank, SvdThreshold };

struct TypeVerdict {
    TypeKind kind = TypeKind::Descriptor;
    Eigen::Index rank_E_estimate = 0;
    Vector singular_values;
    double delta_used = 0.0;
    RankMethod method = RankMethod::ExactRank;
};

// Sentinel: pick delta at the largest relative gap of the spectrum.
inline constexpr double kAutoDelta = -1.0;

// Consecutive singular values must differ by at least this ratio for the
// auto gap rule to commit to a split.
inline constexpr double kMinGapRatio = 10.0;

// Exact-rank identification (noise-free data): rank of M at AUTO tolerance;
// Normal iff rank == n.
TypeVerdict identify_type(const Matrix& M, Eigen::Index n);

// Threshold identification for noisy data: r' singular values <= delta are
// attributed to noise and rank = n - r'. With kAutoDelta, delta is the
// geometric midpoint of the largest relative gap; if no consecutive ratio
// reaches kMinGapRatio the verdict is refused via AmbiguousSpectrum.
TypeVerdict identify_type_threshold(const Matrix& M, Eigen::Index n, double delta = kAutoDelta);

// Relative rank tolerance of the data-side controllability tests. The
// tolerance is rel * max(sigma_1(test matrix), scale of {D_E, D_A, D_B}) so
// that numerically-zero test matrices (B = 0 plants) rank as zero instead
// of amplifying rounding noise.
inline constexpr double kAnalysisRankRel = 1.0e-9;

struct RankCheck {
    bool ok = false;
    Eigen::Index expected = 0;
    RankDecision decision;
};

RankCheck test_c_controllability(const DataMatrices& d, Eigen::Index n,
                                 double rel_tol = kAnalysisRankRel);
RankCheck test_causality(const DataMatrices& d, Eigen::Index rank_M,
                         double rel_tol = kAnalysisRankRel);
RankCheck test_y_controllability(const DataMatrices& d, Eigen::Index rank_M,
                                 double rel_tol = kAnalysisRankRel);

// Block-bidiagonal test matrix for R-controllability: n block rows; left
// half carries -D_A on the diagonal and D_E on the subdiagonal, right half
// carries D_B on the diagonal. Size n^2 x (n+m)n.
Matrix r_controllability_matrix(const Matrix& De, const Matrix& Da, const Matrix& Db);

RankCheck test_r_controllability(const DataMatrices& d, Eigen::Index n,
                                 double rel_tol = kAnalysisRankRel);

struct ControllabilityReport {
    Eigen::Index n = 0;
    Eigen::Index rank_E = 0;
    RankCheck c_controllable;
    RankCheck causal;
    RankCheck y_controllable;
    RankCheck r_controllable;
    double rel_tolerance = kAnalysisRankRel;
};

// All four data-side verdicts in one pass.
ControllabilityReport analyze_controllability(const DataMatrices& d, Eigen::Index n,
                                              Eigen::Index rank_M,
                                              double rel_tol = kAnalysisRankRel);

// Model-based verdicts for cross-validation: evaluates the rank conditions
// on the true (E, A, B) directly, with the pointwise pencil test taken at
// every finite generalized eigenvalue plus the [E B] condition.
ControllabilityReport oracle_report(const DescriptorSystem& sys, double s0,
                                    double rel_tol = kAnalysisRankRel);

}  // namespace descon
