#include "sfhreg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sfhreg/error.hpp"

namespace sfhreg::kernels {

namespace {

void check_scores_shapes(const Matrix& x, const Matrix& w) {
    if (x.cols() != w.cols())
        throw ContractViolation("scores: X has " + std::to_string(x.cols()) + " columns, W has " +
                                std::to_string(w.cols()));
}

void check_weighted_shapes(const Matrix& x, const Matrix& r) {
    if (x.rows() != r.rows())
        throw ContractViolation("weighted_row_sums: X has " + std::to_string(x.rows()) +
                                " rows, weights have " + std::to_string(r.rows()));
}

std::size_t chunk_count(std::size_t n) { return (n + kRowChunk - 1) / kRowChunk; }

// Adds partials[1..] into partials[0] in ascending order.
void combine(std::vector<std::vector<double>>& partials) {
    auto& acc = partials.front();
    for (std::size_t p = 1; p < partials.size(); ++p)
        for (std::size_t e = 0; e < acc.size(); ++e) acc[e] += partials[p][e];
}

// Accumulates XᵀX over rows [lo, hi) into the upper triangle of out (cols x cols).
void gram_rows(const Matrix& x, std::size_t lo, std::size_t hi, std::vector<double>& out) {
    const std::size_t m = x.cols();
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b) {
            double s = 0.0;
            for (std::size_t i = lo; i < hi; ++i) s += x(i, a) * x(i, b);
            out[a * m + b] += s;
        }
}

Matrix mirror_upper(std::size_t m, const std::vector<double>& upper) {
    Matrix g(m, m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b) {
            g(a, b) = upper[a * m + b];
            g(b, a) = upper[a * m + b];
        }
    return g;
}

void abs_products_rows(const Matrix& x, std::size_t lo, std::size_t hi, std::vector<double>& out) {
    const std::size_t m = x.cols();
    for (std::size_t i = lo; i < hi; ++i) {
        double row_abs = 0.0;
        for (std::size_t j = 0; j < m; ++j) row_abs += std::abs(x(i, j));
        for (std::size_t k = 0; k < m; ++k) out[k] += std::abs(x(i, k)) * row_abs;
    }
}

void weighted_rows(const Matrix& x, const Matrix& r, std::size_t lo, std::size_t hi,
                   std::vector<double>& out) {
    const std::size_t m = x.cols();
    const std::size_t c = r.cols();
    for (std::size_t j = 0; j < c; ++j)
        for (std::size_t k = 0; k < m; ++k) {
            double s = 0.0;
            for (std::size_t i = lo; i < hi; ++i) s += r(i, j) * x(i, k);
            out[j * m + k] += s;
        }
}

}  // namespace

// ---------------------------------------------------------------------------
// serial reference

namespace serial {

Matrix gram(const Matrix& x) {
    std::vector<double> upper(x.cols() * x.cols(), 0.0);
    gram_rows(x, 0, x.rows(), upper);
    return mirror_upper(x.cols(), upper);
}

std::vector<double> abs_product_sums(const Matrix& x) {
    std::vector<double> out(x.cols(), 0.0);
    abs_products_rows(x, 0, x.rows(), out);
    return out;
}

Matrix scores(const Matrix& x, const Matrix& w) {
    check_scores_shapes(x, w);
    Matrix z(x.rows(), w.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < w.rows(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < x.cols(); ++k) s += w(j, k) * x(i, k);
            z(i, j) = s;
        }
    return z;
}

Matrix weighted_row_sums(const Matrix& x, const Matrix& r) {
    check_weighted_shapes(x, r);
    std::vector<double> out(r.cols() * x.cols(), 0.0);
    weighted_rows(x, r, 0, x.rows(), out);
    return Matrix(r.cols(), x.cols(), std::move(out));
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP, fixed row chunks

namespace openmp {

Matrix gram(const Matrix& x) {
    const std::size_t m = x.cols();
    const std::size_t chunks = chunk_count(x.rows());
    std::vector<std::vector<double>> partials(chunks, std::vector<double>(m * m, 0.0));
#pragma omp parallel for schedule(static)
    for (std::size_t p = 0; p < chunks; ++p)
        gram_rows(x, p * kRowChunk, std::min(x.rows(), (p + 1) * kRowChunk), partials[p]);
    combine(partials);
    return mirror_upper(m, partials.front());
}

std::vector<double> abs_product_sums(const Matrix& x) {
    const std::size_t chunks = chunk_count(x.rows());
    std::vector<std::vector<double>> partials(chunks, std::vector<double>(x.cols(), 0.0));
#pragma omp parallel for schedule(static)
    for (std::size_t p = 0; p < chunks; ++p)
        abs_products_rows(x, p * kRowChunk, std::min(x.rows(), (p + 1) * kRowChunk), partials[p]);
    combine(partials);
    return std::move(partials.front());
}

Matrix scores(const Matrix& x, const Matrix& w) {
    check_scores_shapes(x, w);
    Matrix z(x.rows(), w.rows());
    const std::size_t n = x.rows();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < w.rows(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < x.cols(); ++k) s += w(j, k) * x(i, k);
            z(i, j) = s;
        }
    return z;
}

Matrix weighted_row_sums(const Matrix& x, const Matrix& r) {
    check_weighted_shapes(x, r);
    const std::size_t chunks = chunk_count(x.rows());
    std::vector<std::vector<double>> partials(chunks, std::vector<double>(r.cols() * x.cols(), 0.0));
#pragma omp parallel for schedule(static)
    for (std::size_t p = 0; p < chunks; ++p)
        weighted_rows(x, r, p * kRowChunk, std::min(x.rows(), (p + 1) * kRowChunk), partials[p]);
    combine(partials);
    return Matrix(r.cols(), x.cols(), std::move(partials.front()));
}

}  // namespace openmp

// ---------------------------------------------------------------------------

Matrix gram(Backend b, const Matrix& x) {
    return b == Backend::serial ? serial::gram(x) : openmp::gram(x);
}

std::vector<double> abs_product_sums(Backend b, const Matrix& x) {
    return b == Backend::serial ? serial::abs_product_sums(x) : openmp::abs_product_sums(x);
}

Matrix scores(Backend b, const Matrix& x, const Matrix& w) {
    return b == Backend::serial ? serial::scores(x, w) : openmp::scores(x, w);
}

Matrix weighted_row_sums(Backend b, const Matrix& x, const Matrix& r) {
    return b == Backend::serial ? serial::weighted_row_sums(x, r) : openmp::weighted_row_sums(x, r);
}

}  // namespace sfhreg::kernels
