#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace sfhreg {

// Dense row-major matrix of doubles. Always at least 1x1.
class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> entries);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool is_square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    bool all_finite() const noexcept;
    Matrix transpose() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

// Throws ContractViolation naming `what` when any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

double max_abs(const Matrix& m) noexcept;
double max_abs_diff(const Matrix& a, const Matrix& b);

// XᵀX. Symmetric by construction: the (a,b) entry is computed once and mirrored.
Matrix gram(const Matrix& x);

// Standard Kronecker product: entry [i*p + k][j*q + l] = A[i][j] * B[k][l].
Matrix kron(const Matrix& a, const Matrix& b);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(const Matrix& m);

// True iff the smallest eigenvalue of (M + Mᵀ)/2 is >= -tol. M must be square and
// symmetric to 1e-9 relative; otherwise ContractViolation.
bool is_psd(const Matrix& m, double tol);

// Closed-form (adjugate) inverse for 1x1, 2x2 and 3x3 matrices. SingularMatrix on det == 0.
Matrix inverse_small(const Matrix& m);

}  // namespace sfhreg
