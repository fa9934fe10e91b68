#pragma once

// Row-reduction kernels shared by the optimizers.
//
// Every kernel exists twice: a plain serial loop in `serial::` kept as the
// reference, and an OpenMP version in `openmp::`. The OpenMP versions split the
// rows into fixed chunks of kRowChunk, reduce each chunk independently and then
// combine the partials in ascending chunk order, so their output does not
// depend on the thread count. For n <= kRowChunk both versions are bitwise equal.

#include <cstddef>
#include <vector>

#include "sfhreg/linalg.hpp"

namespace sfhreg::kernels {

inline constexpr std::size_t kRowChunk = 256;

enum class Backend { serial, openmp };

namespace serial {
Matrix gram(const Matrix& x);
// S[k] = sum_i |x_ik| * sum_j |x_ij|
std::vector<double> abs_product_sums(const Matrix& x);
// Z[i][j] = sum_k W[j][k] * x[i][k]   (n x c)
Matrix scores(const Matrix& x, const Matrix& w);
// G[j][k] = sum_i R[i][j] * x[i][k]   (c x cols(x))
Matrix weighted_row_sums(const Matrix& x, const Matrix& r);
}  // namespace serial

namespace openmp {
Matrix gram(const Matrix& x);
std::vector<double> abs_product_sums(const Matrix& x);
Matrix scores(const Matrix& x, const Matrix& w);
Matrix weighted_row_sums(const Matrix& x, const Matrix& r);
}  // namespace openmp

Matrix gram(Backend b, const Matrix& x);
std::vector<double> abs_product_sums(Backend b, const Matrix& x);
Matrix scores(Backend b, const Matrix& x, const Matrix& w);
Matrix weighted_row_sums(Backend b, const Matrix& x, const Matrix& r);

}  // namespace sfhreg::kernels
