#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "omniview/nn/mask.hpp"
#include "omniview/nn/tape.hpp"

namespace ov::nn {

// Ops take node ids on one tape and return the new node's id. Backward
// closures capture ids plus whatever forward byproducts they need; the next
// node id equals tape.size() at push time, so closures can capture `self`.

template <typename T>
int constant(Tape<T>& tp, MatT<T> value) {
    return tp.push(std::move(value));
}

template <typename T>
int matmul(Tape<T>& tp, int a, int b) {
    if (tp.val(a).cols() != tp.val(b).rows()) throw ContractError("matmul: shape mismatch");
    MatT<T> out = tp.val(a) * tp.val(b);
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out), [self, a, b](Tape<T>& t) {
        t.grad(a) += t.grad(self) * t.val(b).transpose();
        t.grad(b) += t.val(a).transpose() * t.grad(self);
    });
}

// C = A * B^T
template <typename T>
int matmul_nt(Tape<T>& tp, int a, int b) {
    if (tp.val(a).cols() != tp.val(b).cols()) throw ContractError("matmul_nt: shape mismatch");
    MatT<T> out = tp.val(a) * tp.val(b).transpose();
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out), [self, a, b](Tape<T>& t) {
        t.grad(a) += t.grad(self) * t.val(b);
        t.grad(b) += t.grad(self).transpose() * t.val(a);
    });
}

template <typename T>
int add(Tape<T>& tp, int a, int b) {
    if (tp.val(a).rows() != tp.val(b).rows() || tp.val(a).cols() != tp.val(b).cols())
        throw ContractError("add: shape mismatch");
    MatT<T> out = tp.val(a) + tp.val(b);
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out), [self, a, b](Tape<T>& t) {
        t.grad(a) += t.grad(self);
        t.grad(b) += t.grad(self);
    });
}

template <typename T>
int sub(Tape<T>& tp, int a, int b) {
    if (tp.val(a).rows() != tp.val(b).rows() || tp.val(a).cols() != tp.val(b).cols())
        throw ContractError("sub: shape mismatch");
    MatT<T> out = tp.val(a) - tp.val(b);
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out), [self, a, b](Tape<T>& t) {
        t.grad(a) += t.grad(self);
        t.grad(b) -= t.grad(self);
    });
}

// A [n,d] plus a broadcast row vector v [1,d].
template <typename T>
int add_rowvec(Tape<T>& tp, int a, int v) {
    if (tp.val(v).rows() != 1 || tp.val(a).cols() != tp.val(v).cols())
        throw ContractError("add_rowvec: shape mismatch");
    MatT<T> out = tp.val(a).rowwise() + tp.val(v).row(0);
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out), [self, a, v](Tape<T>& t) {
        t.grad(a) += t.grad(self);
        t.grad(v) += t.grad(self).colwise().sum();
    });
}

template <typename T>
int scale(Tape<T>& tp, int a, double s) {
    MatT<T> out = tp.val(a) * static_cast<T>(s);
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out), [self, a, s](Tape<T>& t) {
        t.grad(a) += t.grad(self) * static_cast<T>(s);
    });
}

template <typename T>
int hadamard(Tape<T>& tp, int a, int b) {
    if (tp.val(a).rows() != tp.val(b).rows() || tp.val(a).cols() != tp.val(b).cols())
        throw ContractError("hadamard: shape mismatch");
    MatT<T> out = tp.val(a).cwiseProduct(tp.val(b));
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out), [self, a, b](Tape<T>& t) {
        t.grad(a) += t.grad(self).cwiseProduct(t.val(b));
        t.grad(b) += t.grad(self).cwiseProduct(t.val(a));
    });
}

template <typename T>
int slice_rows(Tape<T>& tp, int a, int row0, int count) {
    if (row0 < 0 || count < 1 || row0 + count > tp.val(a).rows())
        throw ContractError("slice_rows: bad range");
    MatT<T> out = tp.val(a).middleRows(row0, count);
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out), [self, a, row0, count](Tape<T>& t) {
        t.grad(a).middleRows(row0, count) += t.grad(self);
    });
}

template <typename T>
int slice_cols(Tape<T>& tp, int a, int col0, int count) {
    if (col0 < 0 || count < 1 || col0 + count > tp.val(a).cols())
        throw ContractError("slice_cols: bad range");
    MatT<T> out = tp.val(a).middleCols(col0, count);
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out), [self, a, col0, count](Tape<T>& t) {
        t.grad(a).middleCols(col0, count) += t.grad(self);
    });
}

template <typename T>
int concat_rows(Tape<T>& tp, const std::vector<int>& parts) {
    if (parts.empty()) throw ContractError("concat_rows: empty");
    Eigen::Index rows = 0, cols = tp.val(parts[0]).cols();
    for (int p : parts) {
        if (tp.val(p).cols() != cols) throw ContractError("concat_rows: column mismatch");
        rows += tp.val(p).rows();
    }
    MatT<T> out(rows, cols);
    Eigen::Index r = 0;
    for (int p : parts) {
        out.middleRows(r, tp.val(p).rows()) = tp.val(p);
        r += tp.val(p).rows();
    }
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out), [self, parts](Tape<T>& t) {
        Eigen::Index r = 0;
        for (int p : parts) {
            Eigen::Index n = t.val(p).rows();
            t.grad(p) += t.grad(self).middleRows(r, n);
            r += n;
        }
    });
}

template <typename T>
int concat_cols(Tape<T>& tp, const std::vector<int>& parts) {
    if (parts.empty()) throw ContractError("concat_cols: empty");
    Eigen::Index cols = 0, rows = tp.val(parts[0]).rows();
    for (int p : parts) {
        if (tp.val(p).rows() != rows) throw ContractError("concat_cols: row mismatch");
        cols += tp.val(p).cols();
    }
    MatT<T> out(rows, cols);
    Eigen::Index c = 0;
    for (int p : parts) {
        out.middleCols(c, tp.val(p).cols()) = tp.val(p);
        c += tp.val(p).cols();
    }
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out), [self, parts](Tape<T>& t) {
        Eigen::Index c = 0;
        for (int p : parts) {
            Eigen::Index n = t.val(p).cols();
            t.grad(p) += t.grad(self).middleCols(c, n);
            c += n;
        }
    });
}

// out.row(i) = table.row(indices[i]); duplicate indices accumulate in backward.
template <typename T>
int gather_rows(Tape<T>& tp, int table, std::vector<int> indices) {
    const MatT<T>& tab = tp.val(table);
    MatT<T> out(static_cast<Eigen::Index>(indices.size()), tab.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] < 0 || indices[i] >= tab.rows()) throw ContractError("gather_rows: bad index");
        out.row(static_cast<Eigen::Index>(i)) = tab.row(indices[i]);
    }
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out), [self, table, indices = std::move(indices)](Tape<T>& t) {
        for (std::size_t i = 0; i < indices.size(); ++i)
            t.grad(table).row(indices[i]) += t.grad(self).row(static_cast<Eigen::Index>(i));
    });
}

// Row-wise softmax; entries the mask forbids are exactly zero and the row
// max is taken over allowed keys only. mask == nullptr means full attention.
template <typename T>
int softmax_masked(Tape<T>& tp, int logits, const AttentionMask* mask) {
    const MatT<T>& x = tp.val(logits);
    const Eigen::Index n = x.rows(), k = x.cols();
    if (mask && (mask->queries() != n || mask->keys() != k))
        throw ContractError("softmax_masked: mask shape mismatch");
    MatT<T> p = MatT<T>::Zero(n, k);
    for (Eigen::Index q = 0; q < n; ++q) {
        T mx = T(0);
        bool any = false;
        for (Eigen::Index j = 0; j < k; ++j) {
            if (mask && !mask->allowed(static_cast<int>(q), static_cast<int>(j))) continue;
            mx = any ? std::max(mx, x(q, j)) : x(q, j);
            any = true;
        }
        if (!any) throw ContractError("softmax_masked: row with no allowed key");
        T sum = T(0);
        for (Eigen::Index j = 0; j < k; ++j) {
            if (mask && !mask->allowed(static_cast<int>(q), static_cast<int>(j))) continue;
            T e = std::exp(x(q, j) - mx);
            p(q, j) = e;
            sum += e;
        }
        p.row(q) /= sum;
    }
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(p), [self, logits](Tape<T>& t) {
        const MatT<T>& probs = t.val(self);
        MatT<T> gp = t.grad(self).cwiseProduct(probs);
        for (Eigen::Index i = 0; i < gp.rows(); ++i) {
            T dot = gp.row(i).sum();
            gp.row(i) -= probs.row(i) * dot;
        }
        t.grad(logits) += gp;
    });
}

// Per-row layernorm with learned gain/bias rows [1,d].
template <typename T>
int layernorm(Tape<T>& tp, int x, int gamma, int beta, double eps = 1e-5) {
    const MatT<T>& xv = tp.val(x);
    const Eigen::Index n = xv.rows(), d = xv.cols();
    if (tp.val(gamma).rows() != 1 || tp.val(gamma).cols() != d || tp.val(beta).rows() != 1 ||
        tp.val(beta).cols() != d)
        throw ContractError("layernorm: gain/bias shape mismatch");
    MatT<T> xhat(n, d);
    Eigen::Array<T, Eigen::Dynamic, 1> inv_s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        T mu = xv.row(i).mean();
        T var = (xv.row(i).array() - mu).square().mean();
        T s = std::sqrt(var + static_cast<T>(eps));
        inv_s(i) = T(1) / s;
        xhat.row(i) = (xv.row(i).array() - mu) / s;
    }
    MatT<T> out = xhat;
    out.array().rowwise() *= tp.val(gamma).row(0).array();
    out.rowwise() += tp.val(beta).row(0);
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out),
                   [self, x, gamma, beta, xhat = std::move(xhat), inv_s = std::move(inv_s)](Tape<T>& t) {
                       const MatT<T>& g = t.grad(self);
                       t.grad(gamma) += g.cwiseProduct(xhat).colwise().sum();
                       t.grad(beta) += g.colwise().sum();
                       MatT<T> dxhat = g;
                       dxhat.array().rowwise() *= t.val(gamma).row(0).array();
                       MatT<T> dx(g.rows(), g.cols());
                       for (Eigen::Index i = 0; i < g.rows(); ++i) {
                           T m1 = dxhat.row(i).mean();
                           T m2 = dxhat.row(i).cwiseProduct(xhat.row(i)).mean();
                           dx.row(i) = (dxhat.row(i).array() - m1 - xhat.row(i).array() * m2) * inv_s(i);
                       }
                       t.grad(x) += dx;
                   });
}

// Exact GELU: 0.5 x (1 + erf(x / sqrt(2))).
template <typename T>
int gelu(Tape<T>& tp, int x) {
    const MatT<T>& xv = tp.val(x);
    const T inv_sqrt2 = static_cast<T>(0.7071067811865475244);
    MatT<T> out = xv.unaryExpr([inv_sqrt2](T v) {
        return static_cast<T>(0.5) * v * (T(1) + std::erf(v * inv_sqrt2));
    });
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out), [self, x, inv_sqrt2](Tape<T>& t) {
        const T inv_sqrt2pi = static_cast<T>(0.3989422804014326779);
        const MatT<T>& xv = t.val(x);
        MatT<T> dydx = xv.unaryExpr([inv_sqrt2, inv_sqrt2pi](T v) {
            T phi_cdf = static_cast<T>(0.5) * (T(1) + std::erf(v * inv_sqrt2));
            T phi_pdf = inv_sqrt2pi * std::exp(static_cast<T>(-0.5) * v * v);
            return phi_cdf + v * phi_pdf;
        });
        t.grad(x) += t.grad(self).cwiseProduct(dydx);
    });
}

// Mean NLL over rows whose target is >= 0 (-1 rows are ignored); 1x1 result.
template <typename T>
int cross_entropy_rows(Tape<T>& tp, int logits, std::vector<int> targets) {
    const MatT<T>& x = tp.val(logits);
    if (static_cast<Eigen::Index>(targets.size()) != x.rows())
        throw ContractError("cross_entropy_rows: target count mismatch");
    int selected = 0;
    T total = T(0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        int tgt = targets[static_cast<std::size_t>(i)];
        if (tgt < 0) continue;
        if (tgt >= x.cols()) throw ContractError("cross_entropy_rows: target out of range");
        T mx = x.row(i).maxCoeff();
        T lse = mx + std::log((x.row(i).array() - mx).exp().sum());
        total += lse - x(i, tgt);
        ++selected;
    }
    if (selected == 0) throw ContractError("cross_entropy_rows: no selected rows");
    MatT<T> out(1, 1);
    out(0, 0) = total / static_cast<T>(selected);
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out),
                   [self, logits, targets = std::move(targets), selected](Tape<T>& t) {
                       const MatT<T>& x = t.val(logits);
                       T g = t.grad(self)(0, 0) / static_cast<T>(selected);
                       MatT<T>& gx = t.grad(logits);
                       for (Eigen::Index i = 0; i < x.rows(); ++i) {
                           int tgt = targets[static_cast<std::size_t>(i)];
                           if (tgt < 0) continue;
                           T mx = x.row(i).maxCoeff();
                           Eigen::Array<T, 1, Eigen::Dynamic> e = (x.row(i).array() - mx).exp();
                           gx.row(i) += (e / e.sum()).matrix() * g;
                           gx(i, tgt) -= g;
                       }
                   });
}

// Mean over all entries of (a - b)^2; 1x1 result.
template <typename T>
int mse_all(Tape<T>& tp, int a, int b) {
    if (tp.val(a).rows() != tp.val(b).rows() || tp.val(a).cols() != tp.val(b).cols())
        throw ContractError("mse_all: shape mismatch");
    const Eigen::Index n = tp.val(a).size();
    MatT<T> out(1, 1);
    out(0, 0) = (tp.val(a) - tp.val(b)).squaredNorm() / static_cast<T>(n);
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out), [self, a, b, n](Tape<T>& t) {
        T g = t.grad(self)(0, 0) * T(2) / static_cast<T>(n);
        MatT<T> d = (t.val(a) - t.val(b)) * g;
        t.grad(a) += d;
        t.grad(b) -= d;
    });
}

// Huber summed over all entries; 1x1 result.
template <typename T>
int huber_sum(Tape<T>& tp, int pred, int target, double delta) {
    if (delta <= 0) throw InvalidInputError("huber_sum: delta must be positive");
    if (tp.val(pred).rows() != tp.val(target).rows() ||
        tp.val(pred).cols() != tp.val(target).cols())
        throw ContractError("huber_sum: shape mismatch");
    const T d = static_cast<T>(delta);
    MatT<T> r = tp.val(pred) - tp.val(target);
    T total = T(0);
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        T a = std::abs(r.data()[i]);
        total += a <= d ? static_cast<T>(0.5) * a * a : d * (a - static_cast<T>(0.5) * d);
    }
    MatT<T> out(1, 1);
    out(0, 0) = total;
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out), [self, pred, target, d](Tape<T>& t) {
        T g = t.grad(self)(0, 0);
        MatT<T> r = t.val(pred) - t.val(target);
        MatT<T> dr = r.unaryExpr([d](T v) { return std::max(-d, std::min(d, v)); }) * g;
        t.grad(pred) += dr;
        t.grad(target) -= dr;
    });
}

// Mean over all entries; 1x1 result.
template <typename T>
int mean_all(Tape<T>& tp, int a) {
    const Eigen::Index n = tp.val(a).size();
    MatT<T> out(1, 1);
    out(0, 0) = tp.val(a).mean();
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out), [self, a, n](Tape<T>& t) {
        t.grad(a).array() += t.grad(self)(0, 0) / static_cast<T>(n);
    });
}

// Linear combination of 1x1 nodes with constant weights; 1x1 result.
template <typename T>
int weighted_sum(Tape<T>& tp, const std::vector<int>& terms, const std::vector<double>& weights) {
    if (terms.empty() || terms.size() != weights.size())
        throw ContractError("weighted_sum: bad arguments");
    T total = T(0);
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const MatT<T>& v = tp.val(terms[i]);
        if (v.rows() != 1 || v.cols() != 1) throw ContractError("weighted_sum: non-scalar term");
        total += static_cast<T>(weights[i]) * v(0, 0);
    }
    MatT<T> out(1, 1);
    out(0, 0) = total;
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out), [self, terms, weights](Tape<T>& t) {
        T g = t.grad(self)(0, 0);
        for (std::size_t i = 0; i < terms.size(); ++i)
            t.grad(terms[i])(0, 0) += static_cast<T>(weights[i]) * g;
    });
}

// Per-row smooth normalization y = x / sqrt(|x|^2 + eps); differentiable
// everywhere, including at x = 0.
template <typename T>
int normalize_rows_smooth(Tape<T>& tp, int x, double eps = 1e-12) {
    const MatT<T>& xv = tp.val(x);
    const Eigen::Index n = xv.rows();
    Eigen::Array<T, Eigen::Dynamic, 1> inv_norm(n);
    for (Eigen::Index i = 0; i < n; ++i)
        inv_norm(i) = T(1) / std::sqrt(xv.row(i).squaredNorm() + static_cast<T>(eps));
    MatT<T> out = xv;
    out.array().colwise() *= inv_norm;
    int self = static_cast<int>(tp.size());
    return tp.push(std::move(out), [self, x, inv_norm = std::move(inv_norm)](Tape<T>& t) {
        const MatT<T>& xv = t.val(x);
        const MatT<T>& g = t.grad(self);
        MatT<T> dx(xv.rows(), xv.cols());
        for (Eigen::Index i = 0; i < xv.rows(); ++i) {
            T inv = inv_norm(i);
            T dot = g.row(i).dot(xv.row(i));
            dx.row(i) = g.row(i) * inv - xv.row(i) * (dot * inv * inv * inv);
        }
        t.grad(x) += dx;
    });
}

}  // namespace ov::nn
