#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>

#include "omniview/common.hpp"

namespace ov::nn {

template <typename T>
using MatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
MatT<T> zeros(Eigen::Index rows, Eigen::Index cols) {
    return MatT<T>::Zero(rows, cols);
}

// N(0, std^2) entries, deterministic in rng state, drawn in row-major order.
template <typename T>
MatT<T> randn(Eigen::Index rows, Eigen::Index cols, Rng& rng, double std_dev = 1.0) {
    MatT<T> m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = static_cast<T>(rng.normal() * std_dev);
    return m;
}

// Matrix with orthonormal columns (rows >= cols) or rows (rows < cols) from
// the QR factorization of a seeded Gaussian matrix, sign-fixed so the
// decomposition is unique.
template <typename T>
MatT<T> orthonormal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    bool wide = rows < cols;
    Eigen::Index n = std::max(rows, cols), k = std::min(rows, cols);
    MatT<double> g = randn<double>(n, k, rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
    Eigen::MatrixXd r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < k; ++j)
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    MatT<T> out(rows, cols);
    if (wide)
        out = q.transpose().cast<T>();
    else
        out = q.cast<T>();
    return out;
}

template <typename T>
bool all_finite(const MatT<T>& m) {
    return m.allFinite();
}

}  // namespace ov::nn
