#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sfhreg/error.hpp"
#include "sfhreg/sfh.hpp"

using namespace sfhreg;

TEST_CASE("linear diagonal on a hand example") {
    // rows (1, 2) and (1, -1): sum_i |x_ik| sum_j |x_ij| = {3 + 2, 6 + 2}
    const Matrix x{{1, 2}, {1, -1}};
    const auto d = build_sfh_linear(x, 1e-8);
    CHECK(d.entries[0] == doctest::Approx(1e-8 + 2 * 5));
    CHECK(d.entries[1] == doctest::Approx(1e-8 + 2 * 8));
    CHECK(d.inverse_entries[1] == 1.0 / d.entries[1]);
    CHECK(d.loss_kind == LossKind::linear);
    const auto l = build_sfh_lffr(x, 1e-8);
    CHECK(l.entries[0] == doctest::Approx(1e-8 + 0.155 * 5));
    CHECK(l.loss_kind == LossKind::lffr);
    CHECK(build_sfh_linear(x, 1e-8, kernels::Backend::serial).entries == d.entries);
}

TEST_CASE("single sample") {
    const auto d = build_sfh_linear(Matrix{{1}}, 1e-8);
    CHECK(d.entries[0] == 2 + 1e-8);
}

TEST_CASE("every entry is at least epsilon") {
    const auto d = build_sfh_linear(Matrix(3, 2, 0.0), 1e-6);
    CHECK(d.entries == std::vector<double>{1e-6, 1e-6});
    CHECK_THROWS_AS(build_sfh_linear(Matrix(1, 1), 0.0), ContractViolation);
    CHECK_THROWS_AS(SfhDiagonal::from_entries({1e-9}, LossKind::linear, 1e-8), ContractViolation);
}

TEST_CASE("quadratic-gradient diagonal dominates a symmetric H") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t) {
        Matrix h = oracle::random_matrix(rng, 3, 3, -2, 2);
        h = h + h.transpose();
        const auto d = build_quadratic_gradient_diag(h, 1e-8);
        CHECK(is_psd(d.matrix() - h, 1e-9));
        CHECK(d.loss_kind == LossKind::hessian);
    }
    CHECK_THROWS_AS(build_quadratic_gradient_diag(Matrix{{1, 2}, {0, 1}}, 1e-8), ContractViolation);
}

TEST_CASE("shared SFH across outputs") {
    const auto shared = replicate_for_outputs(build_sfh_linear(Matrix{{1, 2}, {1, 0}}, 1e-8), 3);
    CHECK(shared.outputs() == 3);
    CHECK(shared.block(2).data() == shared.block(0).data());
    CHECK(shared.materialize() == kron(Matrix::identity(3), shared.diagonal().matrix()));
    CHECK_THROWS_AS(shared.block(3), ContractViolation);
}

TEST_CASE("loss kind names") {
    for (auto k : {LossKind::linear, LossKind::lffr, LossKind::hessian}) CHECK(loss_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(loss_kind_from_string("ridge"), ContractViolation);
}
