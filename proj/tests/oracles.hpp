#pragma once

// Reference computations for tests. Deliberately independent of the library:
// own RNG (std::mt19937_64), long double accumulation, textbook algorithms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sfhreg/linalg.hpp"

namespace oracle {

using sfhreg::Matrix;

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(r, c);
    for (auto& v : m.data()) v = u(rng);
    return m;
}

// Random design matrix: first column ones, the rest in [-1, 1].
inline Matrix random_design(std::mt19937_64& rng, std::size_t n, std::size_t d) {
    Matrix x = random_matrix(rng, n, d + 1);
    for (std::size_t i = 0; i < n; ++i) x(i, 0) = 1.0;
    return x;
}

inline Matrix naive_gram(const Matrix& x) {
    Matrix g(x.cols(), x.cols());
    for (std::size_t a = 0; a < x.cols(); ++a)
        for (std::size_t b = 0; b < x.cols(); ++b) {
            long double s = 0;
            for (std::size_t i = 0; i < x.rows(); ++i) s += static_cast<long double>(x(i, a)) * x(i, b);
            g(a, b) = static_cast<double>(s);
        }
    return g;
}

// Gauss-Jordan with partial pivoting in long double.
inline Matrix gauss_jordan_inverse(const Matrix& m) {
    const std::size_t n = m.rows();
    std::vector<std::vector<long double>> a(n, std::vector<long double>(2 * n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i][j] = m(i, j);
        a[i][n + i] = 1;
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (a[piv][col] == 0) throw std::runtime_error("singular");
        std::swap(a[piv], a[col]);
        const long double p = a[col][col];
        for (auto& v : a[col]) v /= p;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const long double f = a[r][col];
            for (std::size_t j = 0; j < 2 * n; ++j) a[r][j] -= f * a[col][j];
        }
    }
    Matrix inv(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv(i, j) = static_cast<double>(a[i][n + j]);
    return inv;
}

// Eigenvalues of a symmetric 2x2 or 3x3 from the characteristic polynomial, ascending.
inline std::vector<double> charpoly_eigenvalues(const Matrix& m) {
    if (m.rows() == 1) return {m(0, 0)};
    if (m.rows() == 2) {
        const double tr = m(0, 0) + m(1, 1);
        const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
        return {tr / 2 - disc, tr / 2 + disc};
    }
    if (m.rows() != 3) throw std::runtime_error("charpoly oracle: size");
    // Trigonometric solution of the depressed cubic.
    const double p1 = m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2);
    const double q = (m(0, 0) + m(1, 1) + m(2, 2)) / 3;
    const double p2 = (m(0, 0) - q) * (m(0, 0) - q) + (m(1, 1) - q) * (m(1, 1) - q) + (m(2, 2) - q) * (m(2, 2) - q) + 2 * p1;
    const double p = std::sqrt(p2 / 6);
    if (p == 0) return {q, q, q};
    Matrix b(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) b(i, j) = (m(i, j) - (i == j ? q : 0.0)) / p;
    const double detb = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                        b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    const double r = std::clamp(detb / 2, -1.0, 1.0);
    const double phi = std::acos(r) / 3;
    const double e1 = q + 2 * p * std::cos(phi);
    const double e3 = q + 2 * p * std::cos(phi + 2 * std::numbers::pi / 3);
    const double e2 = 3 * q - e1 - e3;
    std::vector<double> e{e1, e2, e3};
    std::sort(e.begin(), e.end());
    return e;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double cubic_surrogate(double x) { return 0.5 + 0.19824 * x - 0.0044650 * x * x * x; }

// Central differences of f with respect to every entry of w.
inline Matrix central_difference(const std::function<double(const Matrix&)>& f, const Matrix& w, double h) {
    Matrix g(w.rows(), w.cols());
    for (std::size_t e = 0; e < w.size(); ++e) {
        Matrix wp = w;
        Matrix wm = w;
        wp.data()[e] += h;
        wm.data()[e] -= h;
        g.data()[e] = (f(wp) - f(wm)) / (2 * h);
    }
    return g;
}

// Σ_i Δ_i x_i x_iᵀ for one output with weights w (row vector) and targets y.
inline Matrix lffr_hessian(const Matrix& x, const std::vector<double>& y, std::span<const double> w) {
    const std::size_t p = x.cols();
    Matrix h(p, p);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double z = 0;
        for (std::size_t k = 0; k < p; ++k) z += x(i, k) * w[k];
        const double s = sigmoid(z);
        // second derivative of (s(z) - y)^2 in z
        const double d = 2 * (s * (1 - s)) * (s * (1 - s)) + 2 * (s - y[i]) * s * (1 - s) * (1 - 2 * s);
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < p; ++b) h(a, b) += d * x(i, a) * x(i, b);
    }
    return h;
}

}  // namespace oracle
