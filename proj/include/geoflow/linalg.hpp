#pragma once

#include <Eigen/Dense>

#include "geoflow/jet.hpp"
#include "geoflow/tensor.hpp"

namespace geoflow {

inline Eigen::MatrixXd to_eigen(const Mat<double>& m) {
    const int n = m.dim();
    Eigen::MatrixXd e(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) e(i, j) = m(i, j);
    return e;
}

inline Mat<double> from_eigen(const Eigen::MatrixXd& e) {
    Mat<double> m(static_cast<int>(e.rows()));
    for (int i = 0; i < e.rows(); ++i)
        for (int j = 0; j < e.cols(); ++j) m(static_cast<int>(i), static_cast<int>(j)) = e(i, j);
    return m;
}

/// Ascending eigenvalues of a symmetric matrix.
inline std::vector<double> sym_eigenvalues(const Mat<double>& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(m));
    std::vector<double> ev(m.dim());
    for (int i = 0; i < m.dim(); ++i) ev[i] = solver.eigenvalues()(i);
    return ev;
}

/// Smallest eigenvalue bound used for the positive-definiteness gate.
inline double smallest_eigenvalue(const Mat<double>& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(m));
    return solver.eigenvalues()(0);
}

/// Inverse of a jet-valued symmetric matrix. Starts with the exact inverse of
/// the constant term and runs Newton iterations X <- X(2I - AX); the residual
/// order doubles each step, so three steps are exact at truncation order 4.
template <int K>
Mat<Jet<K>> jet_matrix_inverse(const Mat<Jet<K>>& a) {
    const int n = a.dim();
    const int jet_dim = a(0, 0).dim();

    Mat<double> a0(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a0(i, j) = a(i, j).value();
    Eigen::MatrixXd inv0 = to_eigen(a0).inverse();
    if (!inv0.allFinite()) throw evaluation_error("metric is singular at the chart point");

    auto zero = Jet<K>::constant(jet_dim, 0.0);
    Mat<Jet<K>> x(n, zero);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) x(i, j) = Jet<K>::constant(jet_dim, inv0(i, j));

    auto matmul = [&](const Mat<Jet<K>>& p, const Mat<Jet<K>>& q) {
        Mat<Jet<K>> r(n, zero);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Jet<K> s = zero;
                for (int k = 0; k < n; ++k) s += p(i, k) * q(k, j);
                r(i, j) = s;
            }
        return r;
    };

    const int steps = (K == 0) ? 0 : (K <= 1 ? 1 : (K <= 3 ? 2 : 3));
    for (int s = 0; s < steps; ++s) {
        Mat<Jet<K>> ax = matmul(a, x);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                ax(i, j) = -ax(i, j);
                if (i == j) ax(i, j) += 2.0;
            }
        }
        x = matmul(x, ax);
    }
    return x;
}

}  // namespace geoflow
