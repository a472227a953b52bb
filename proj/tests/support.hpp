#pragma once

// Shared helpers and independent oracles for the test suite. Everything in
// here deliberately avoids the library's own computational paths: the
// characteristic polynomial comes from the Leverrier-Faddeev recursion, the
// pencil polynomial from Vandermonde interpolation of determinant samples,
// and residuals are evaluated against the raw system matrices.

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <vector>

#include "descon/matrix_kernels.hpp"
#include "descon/model.hpp"
#include "descon/rng.hpp"

namespace test_support {

using descon::ComplexVector;
using descon::Matrix;
using descon::Vector;

// Characteristic polynomial coefficients by the Leverrier-Faddeev trace
// recursion: p(s) = s^n + c[1] s^{n-1} + ... + c[n].
inline std::vector<double> char_poly(const Matrix& a) {
    const Eigen::Index n = a.rows();
    std::vector<double> c(n + 1, 0.0);
    c[0] = 1.0;
    Matrix mk = Matrix::Zero(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        mk = a * mk + c[k - 1] * Matrix::Identity(n, n);
        c[k] = -(a * mk).trace() / static_cast<double>(k);
    }
    return c;
}

inline std::complex<double> eval_poly(const std::vector<double>& coeffs,
                                      std::complex<double> s) {
    std::complex<double> acc(0.0, 0.0);
    for (double c : coeffs) acc = acc * s + c;
    return acc;
}

// Coefficients of det(sE - A) (degree <= n) by sampling the determinant at
// n+1 real points and solving the Vandermonde system.
inline std::vector<double> pencil_poly(const Matrix& E, const Matrix& A) {
    const Eigen::Index n = E.rows();
    const Eigen::Index pts = n + 1;
    Matrix vandermonde(pts, pts);
    Vector rhs(pts);
    for (Eigen::Index i = 0; i < pts; ++i) {
        const double s = -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(pts - 1);
        double p = 1.0;
        for (Eigen::Index j = 0; j < pts; ++j) {
            vandermonde(i, pts - 1 - j) = p;
            p *= s;
        }
        rhs(i) = (s * E - A).determinant();
    }
    const Vector coeffs = vandermonde.fullPivLu().solve(rhs);
    std::vector<double> out(coeffs.size());
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) out[i] = coeffs(i);
    return out;  // out[0] s^n + ... + out[n]
}

inline bool complex_multisets_match(ComplexVector a, ComplexVector b, double tol) {
    if (a.size() != b.size()) return false;
    std::vector<std::complex<double>> va(a.data(), a.data() + a.size());
    std::vector<std::complex<double>> vb(b.data(), b.data() + b.size());
    const auto lex = [](const std::complex<double>& x, const std::complex<double>& y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    };
    std::sort(va.begin(), va.end(), lex);
    std::sort(vb.begin(), vb.end(), lex);
    for (std::size_t i = 0; i < va.size(); ++i) {
        if (std::abs(va[i] - vb[i]) > tol) return false;
    }
    return true;
}

inline Matrix random_orthogonal(descon::Rng& rng, Eigen::Index n) {
    const Matrix g = rng.uniform_matrix(n, n, -1.0, 1.0);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (r(i, i) < 0) q.col(i) = -q.col(i);
    }
    return q;
}

// Kalman controllability matrix rank of a normal pair.
inline Eigen::Index kalman_rank(const Matrix& a, const Matrix& b) {
    const Eigen::Index n = a.rows();
    Matrix krylov(n, n * b.cols());
    krylov.leftCols(b.cols()) = b;
    for (Eigen::Index k = 1; k < n; ++k) {
        krylov.middleCols(k * b.cols(), b.cols()) =
            a * krylov.middleCols((k - 1) * b.cols(), b.cols());
    }
    return descon::rank_with_tolerance(krylov).rank;
}

}  // namespace test_support
