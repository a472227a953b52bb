#include "descon/analysis.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

namespace descon {

namespace {

RankCheck ranked_check(const Matrix& test, Eigen::Index expected, double rel_tol,
                       double scale_floor) {
    Eigen::JacobiSVD<Matrix> svd(test);
    RankCheck check;
    check.expected = expected;
    check.decision.singular_values = svd.singularValues();
    const double s1 = check.decision.singular_values.size() ? check.decision.singular_values(0) : 0.0;
    check.decision.tolerance_used = rel_tol * std::max(s1, scale_floor);
    check.decision.rank =
        (check.decision.singular_values.array() > check.decision.tolerance_used).count();
    check.ok = check.decision.rank == expected;
    return check;
}

Eigen::Index complex_rank(const Eigen::MatrixXcd& m, double tol) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return (svd.singularValues().array() > tol).count();
}

}  // namespace

TypeVerdict identify_type(const Matrix& M, Eigen::Index n) {
    ensure_finite(M, "identify_type");
    if (M.rows() != n || M.cols() != n) throw InvalidMatrix("identify_type: M must be n x n");
    const RankDecision rd = rank_with_tolerance(M);
    TypeVerdict v;
    v.method = RankMethod::ExactRank;
    v.rank_E_estimate = rd.rank;
    v.singular_values = rd.singular_values;
    v.delta_used = rd.tolerance_used;
    v.kind = rd.rank == n ? TypeKind::Normal : TypeKind::Descriptor;
    return v;
}

TypeVerdict identify_type_threshold(const Matrix& M, Eigen::Index n, double delta) {
    ensure_finite(M, "identify_type_threshold");
    if (M.rows() != n || M.cols() != n) {
        throw InvalidMatrix("identify_type_threshold: M must be n x n");
    }
    Eigen::JacobiSVD<Matrix> svd(M);
    const Vector sv = svd.singularValues();

    double used = delta;
    if (delta < 0.0) {
        // Auto rule: split at the largest relative gap, requiring at least
        // a kMinGapRatio step between consecutive singular values.
        double best_ratio = 0.0;
        Eigen::Index best_j = -1;
        for (Eigen::Index j = 0; j + 1 < sv.size(); ++j) {
            const double hi = sv(j);
            const double lo = sv(j + 1);
            const double ratio = lo > 0.0 ? hi / lo : (hi > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
            if (ratio > best_ratio) {
                best_ratio = ratio;
                best_j = j;
            }
        }
        if (best_j < 0 || best_ratio < kMinGapRatio) {
            throw AmbiguousSpectrum(
                "identify_type_threshold: no consecutive singular-value ratio reaches " +
                std::to_string(kMinGapRatio) + "; refusing a rank verdict");
        }
        const double hi = sv(best_j);
        const double lo = sv(best_j + 1);
        used = lo > 0.0 ? std::sqrt(hi * lo) : hi / kMinGapRatio;
    }

    const Eigen::Index r_prime = (sv.array() <= used).count();
    TypeVerdict v;
    v.method = RankMethod::SvdThreshold;
    v.singular_values = sv;
    v.delta_used = used;
    v.rank_E_estimate = n - r_prime;
    v.kind = v.rank_E_estimate == n ? TypeKind::Normal : TypeKind::Descriptor;
    return v;
}

RankCheck test_c_controllability(const DataMatrices& d, Eigen::Index n, double rel_tol) {
    const Eigen::Index m = d.D_B.cols();
    Matrix krylov(n, n * m);
    krylov.leftCols(m) = d.D_B;
    for (Eigen::Index k = 1; k < n; ++k) {
        krylov.middleCols(k * m, m) = d.D_E * krylov.middleCols((k - 1) * m, m);
    }
    return ranked_check(krylov, n, rel_tol, d.scale());
}

RankCheck test_causality(const DataMatrices& d, Eigen::Index rank_M, double rel_tol) {
    const Eigen::Index n = d.D_E.rows();
    Matrix test = Matrix::Zero(2 * n, 2 * n);
    test.topLeftCorner(n, n) = d.D_E;
    test.bottomLeftCorner(n, n) = d.D_A;
    test.bottomRightCorner(n, n) = d.D_E;
    return ranked_check(test, n + rank_M, rel_tol, d.scale());
}

RankCheck test_y_controllability(const DataMatrices& d, Eigen::Index rank_M, double rel_tol) {
    const Eigen::Index n = d.D_E.rows();
    const Eigen::Index m = d.D_B.cols();
    Matrix test = Matrix::Zero(2 * n, 2 * n + m);
    test.topLeftCorner(n, n) = d.D_E;
    test.block(n, 0, n, n) = d.D_A;
    test.block(n, n, n, n) = d.D_E;
    test.block(n, 2 * n, n, m) = d.D_B;
    return ranked_check(test, n + rank_M, rel_tol, d.scale());
}

Matrix r_controllability_matrix(const Matrix& De, const Matrix& Da, const Matrix& Db) {
    const Eigen::Index n = De.rows();
    const Eigen::Index m = Db.cols();
    Matrix test = Matrix::Zero(n * n, (n + m) * n);
    for (Eigen::Index br = 0; br < n; ++br) {
        test.block(br * n, br * n, n, n) = -Da;
        if (br >= 1) test.block(br * n, (br - 1) * n, n, n) = De;
        test.block(br * n, n * n + br * m, n, m) = Db;
    }
    return test;
}

RankCheck test_r_controllability(const DataMatrices& d, Eigen::Index n, double rel_tol) {
    const Matrix test = r_controllability_matrix(d.D_E, d.D_A, d.D_B);
    return ranked_check(test, n * n, rel_tol, d.scale());
}

ControllabilityReport analyze_controllability(const DataMatrices& d, Eigen::Index n,
                                              Eigen::Index rank_M, double rel_tol) {
    ControllabilityReport report;
    report.n = n;
    report.rank_E = rank_M;
    report.rel_tolerance = rel_tol;
    report.c_controllable = test_c_controllability(d, n, rel_tol);
    report.causal = test_causality(d, rank_M, rel_tol);
    report.y_controllable = test_y_controllability(d, rank_M, rel_tol);
    report.r_controllable = test_r_controllability(d, n, rel_tol);
    return report;
}

ControllabilityReport oracle_report(const DescriptorSystem& sys, double s0, double rel_tol) {
    sys.validate();
    const RegularityCertificate cert = is_regular(sys);
    if (!cert.regular) throw NotRegular("oracle_report: system pencil appears irregular");

    const Eigen::Index n = sys.n();
    const Eigen::Index m = sys.m();
    const double scale = std::max({sys.E.norm(), sys.A.norm(), sys.B.norm(), 1.0});

    ControllabilityReport report;
    report.n = n;
    report.rel_tolerance = rel_tol;
    report.rank_E = rank_with_tolerance(sys.E).rank;

    // Pointwise pencil condition: rank can only drop at the finite
    // generalized eigenvalues, so checking there plus [E B] suffices.
    const Matrix S = s0 * sys.E - sys.A;
    const Matrix D = S.partialPivLu().solve(sys.E);
    const FiniteSpectrum spectrum = finite_generalized_eigenvalues(D, s0);

    Matrix eb(n, n + m);
    eb << sys.E, sys.B;
    RankCheck c = ranked_check(eb, n, rel_tol, scale);
    if (c.ok) {
        for (Eigen::Index i = 0; i < spectrum.finite.size(); ++i) {
            Eigen::MatrixXcd pencil(n, n + m);
            pencil.leftCols(n) = spectrum.finite(i) * sys.E.cast<std::complex<double>>() -
                                 sys.A.cast<std::complex<double>>();
            pencil.rightCols(m) = sys.B.cast<std::complex<double>>();
            if (complex_rank(pencil, rel_tol * scale) < n) {
                c.ok = false;
                break;
            }
        }
    }
    report.c_controllable = c;
    report.c_controllable.expected = n;

    Matrix causal_test = Matrix::Zero(2 * n, 2 * n);
    causal_test.topLeftCorner(n, n) = sys.E;
    causal_test.bottomLeftCorner(n, n) = sys.A;
    causal_test.bottomRightCorner(n, n) = sys.E;
    report.causal = ranked_check(causal_test, n + report.rank_E, rel_tol, scale);

    Matrix y_test = Matrix::Zero(2 * n, 2 * n + m);
    y_test.topLeftCorner(n, n) = sys.E;
    y_test.block(n, 0, n, n) = sys.A;
    y_test.block(n, n, n, n) = sys.E;
    y_test.block(n, 2 * n, n, m) = sys.B;
    report.y_controllable = ranked_check(y_test, n + report.rank_E, rel_tol, scale);

    const Matrix wm = r_controllability_matrix(sys.E, sys.A, sys.B);
    report.r_controllable = ranked_check(wm, n * n, rel_tol, scale);
    return report;
}

}  // namespace descon
