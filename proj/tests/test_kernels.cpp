#include <doctest.h>

#include <omp.h>

#include <random>

#include "oracles.hpp"
#include "sfhreg/kernels.hpp"

using namespace sfhreg;
namespace k = sfhreg::kernels;

namespace {

void check_all_equal(const Matrix& x, const Matrix& w, const Matrix& r) {
    CHECK(k::serial::gram(x) == k::openmp::gram(x));
    CHECK(k::serial::abs_product_sums(x) == k::openmp::abs_product_sums(x));
    CHECK(k::serial::scores(x, w) == k::openmp::scores(x, w));
    CHECK(k::serial::weighted_row_sums(x, r) == k::openmp::weighted_row_sums(x, r));
}

}  // namespace

TEST_CASE("serial and OpenMP agree bitwise up to one chunk") {
    std::mt19937_64 rng(1);
    for (std::size_t n : {1u, 7u, 100u, 256u}) {
        const Matrix x = oracle::random_design(rng, n, 4);
        check_all_equal(x, oracle::random_matrix(rng, 3, 5), oracle::random_matrix(rng, n, 3));
    }
}

TEST_CASE("OpenMP result does not depend on the thread count") {
    std::mt19937_64 rng(2);
    const std::size_t n = 2000;
    const Matrix x = oracle::random_design(rng, n, 5);
    const Matrix r = oracle::random_matrix(rng, n, 2);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto g1 = k::openmp::gram(x);
    const auto s1 = k::openmp::abs_product_sums(x);
    const auto w1 = k::openmp::weighted_row_sums(x, r);
    for (int t : {2, 3, 8}) {
        omp_set_num_threads(t);
        CHECK(k::openmp::gram(x) == g1);
        CHECK(k::openmp::abs_product_sums(x) == s1);
        CHECK(k::openmp::weighted_row_sums(x, r) == w1);
    }
    omp_set_num_threads(saved);
    // and close to the serial loop
    CHECK(max_abs_diff(g1, k::serial::gram(x)) < 1e-10);
    CHECK(max_abs_diff(w1, k::serial::weighted_row_sums(x, r)) < 1e-10);
}

TEST_CASE("kernel definitions") {
    const Matrix x{{1, -2}, {1, 3}};
    // S[k] = sum_i |x_ik| * sum_j |x_ij|: rows sum to 3 and 4
    CHECK(k::serial::abs_product_sums(x) == std::vector<double>{7, 18});
    const Matrix w{{1, 1}, {0, 2}};
    CHECK(k::serial::scores(x, w) == Matrix{{-1, -4}, {4, 6}});
    const Matrix r{{1, 0}, {2, 1}};
    CHECK(k::serial::weighted_row_sums(x, r) == Matrix{{3, 4}, {1, 3}});
    CHECK(max_abs_diff(k::serial::gram(x), oracle::naive_gram(x)) == 0);
}
