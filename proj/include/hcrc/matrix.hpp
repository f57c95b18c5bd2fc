#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "hcrc/common.hpp"

namespace hcrc {

// Dense row-major matrix of doubles. Plain value type: the numeric
// substrate for graphs, embeddings and tensor payloads.
struct Matrix {
    size_t rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& at(size_t i, size_t j) { return a[i * cols + j]; }
    double at(size_t i, size_t j) const { return a[i * cols + j]; }
    size_t size() const { return rows * cols; }
    double* row(size_t i) { return a.data() + i * cols; }
    const double* row(size_t i) const { return a.data() + i * cols; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    static Matrix zeros_like(const Matrix& m) { return Matrix(m.rows, m.cols); }

    static Matrix gaussian(size_t r, size_t c, uint64_t seed, double stddev = 1.0) {
        Matrix m(r, c);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> dist(0.0, stddev);
        for (auto& x : m.a) x = dist(rng);
        return m;
    }
};

inline double l2_norm(const double* v, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += v[i] * v[i];
    return std::sqrt(s);
}

inline double dot(const double* u, const double* v, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += u[i] * v[i];
    return s;
}

inline double euclidean(const double* u, const double* v, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double d = u[i] - v[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline double cosine(const double* u, const double* v, size_t n, double eps = 1e-12) {
    double nu = std::max(l2_norm(u, n), eps);
    double nv = std::max(l2_norm(v, n), eps);
    return dot(u, v, n) / (nu * nv);
}

// Compressed sparse row matrix. Used for normalized adjacencies, where the
// GCN only ever needs sparse-times-dense products.
struct SparseMatrix {
    size_t rows = 0, cols = 0;
    std::vector<size_t> indptr;   // rows + 1
    std::vector<size_t> indices;  // column per entry
    std::vector<double> values;

    // y = S * x, x dense (cols x k)
    Matrix multiply(const Matrix& x) const {
        if (x.rows != cols) throw Error("spmm: shape mismatch");
        Matrix y(rows, x.cols);
        for (size_t i = 0; i < rows; ++i) {
            double* yi = y.row(i);
            for (size_t p = indptr[i]; p < indptr[i + 1]; ++p) {
                const double w = values[p];
                const double* xj = x.row(indices[p]);
                for (size_t c = 0; c < x.cols; ++c) yi[c] += w * xj[c];
            }
        }
        return y;
    }

    Matrix to_dense() const {
        Matrix d(rows, cols);
        for (size_t i = 0; i < rows; ++i)
            for (size_t p = indptr[i]; p < indptr[i + 1]; ++p) d.at(i, indices[p]) += values[p];
        return d;
    }
};

}  // namespace hcrc
