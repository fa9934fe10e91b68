#include "sfhreg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sfhreg/error.hpp"
#include "sfhreg/kernels.hpp"

namespace sfhreg {

namespace {

void check_dims(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) throw ContractViolation("matrix dimensions must be at least 1x1");
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ContractViolation(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    check_dims(rows, cols);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
    check_dims(rows_, cols_);
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ContractViolation("ragged initializer for Matrix");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    check_dims(rows, cols);
    if (data_.size() != rows * cols)
        throw ContractViolation("Matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                                std::to_string(rows * cols));
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> entries) {
    Matrix m(entries.size(), entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
    return m;
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

void require_finite(const Matrix& m, const char* what) {
    if (!m.all_finite()) throw ContractViolation(std::string(what) + ": non-finite entry");
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "operator+");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "operator-");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
    return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw ContractViolation("operator*: inner dimensions " + std::to_string(a.cols()) + " and " +
                                std::to_string(b.rows()));
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

Matrix operator*(double s, const Matrix& a) {
    Matrix out = a;
    for (auto& v : out.data()) v *= s;
    return out;
}

double max_abs(const Matrix& m) noexcept {
    double best = 0.0;
    for (double v : m.data()) best = std::max(best, std::abs(v));
    return best;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    check_same_shape(a, b, "max_abs_diff");
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, std::abs(a.data()[i] - b.data()[i]));
    return best;
}

Matrix gram(const Matrix& x) {
    require_finite(x, "gram");
    return kernels::openmp::gram(x);
}

Matrix kron(const Matrix& a, const Matrix& b) {
    require_finite(a, "kron");
    require_finite(b, "kron");
    const std::size_t p = b.rows();
    const std::size_t q = b.cols();
    Matrix out(a.rows() * p, a.cols() * q);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            for (std::size_t k = 0; k < p; ++k)
                for (std::size_t l = 0; l < q; ++l) out(i * p + k, j * q + l) = a(i, j) * b(k, l);
    return out;
}

std::vector<double> symmetric_eigenvalues(const Matrix& m) {
    if (!m.is_square()) throw ContractViolation("symmetric_eigenvalues: matrix is not square");
    const std::size_t n = m.rows();
    Matrix a = m;

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += a(i, j) * a(i, j);
        return s;
    };
    double total = 0.0;
    for (double v : a.data()) total += v * v;

    // Cyclic sweeps until the off-diagonal mass is negligible.
    for (int sweep = 0; sweep < 100; ++sweep) {
        if (off_norm() <= 1e-30 * std::max(total, 1e-300)) break;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
    }

    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

bool is_psd(const Matrix& m, double tol) {
    if (!m.is_square()) throw ContractViolation("is_psd: matrix is not square");
    require_finite(m, "is_psd");
    const double scale = std::max(1.0, max_abs(m));
    const std::size_t n = m.rows();
    Matrix sym(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(m(i, j) - m(j, i)) > 1e-9 * scale)
                throw ContractViolation("is_psd: matrix is not symmetric at (" + std::to_string(i) + ", " +
                                        std::to_string(j) + ")");
            sym(i, j) = 0.5 * (m(i, j) + m(j, i));
        }
    return symmetric_eigenvalues(sym).front() >= -tol;
}

Matrix inverse_small(const Matrix& m) {
    if (!m.is_square() || m.rows() > 3)
        throw ContractViolation("inverse_small: expects a square matrix of size <= 3");
    require_finite(m, "inverse_small");

    const std::size_t n = m.rows();
    const double scale = max_abs(m);
    if (n == 1) {
        if (m(0, 0) == 0.0) throw SingularMatrix("inverse_small: singular 1x1 matrix");
        return Matrix{{1.0 / m(0, 0)}};
    }
    if (n == 2) {
        const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        if (det == 0.0 || std::abs(det) <= 1e-14 * scale * scale)
            throw SingularMatrix("inverse_small: singular 2x2 matrix");
        return Matrix{{m(1, 1) / det, -m(0, 1) / det}, {-m(1, 0) / det, m(0, 0) / det}};
    }

    // 3x3: transpose of the cofactor matrix over the determinant.
    Matrix cof(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            const std::size_t r0 = (i + 1) % 3, r1 = (i + 2) % 3;
            const std::size_t c0 = (j + 1) % 3, c1 = (j + 2) % 3;
            cof(i, j) = m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
        }
    const double det = m(0, 0) * cof(0, 0) + m(0, 1) * cof(0, 1) + m(0, 2) * cof(0, 2);
    if (det == 0.0 || std::abs(det) <= 1e-14 * scale * scale * scale)
        throw SingularMatrix("inverse_small: singular 3x3 matrix");
    Matrix inv(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) inv(i, j) = cof(j, i) / det;
    return inv;
}

}  // namespace sfhreg
