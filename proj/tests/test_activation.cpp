#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sfhreg/activation.hpp"
#include "sfhreg/error.hpp"

using namespace sfhreg;

TEST_CASE("sigmoid and logit") {
    CHECK(sigmoid(0) == 0.5);
    CHECK(sigmoid(500) < 1.0);
    CHECK(sigmoid(500) >= 1.0 - 1e-12);
    CHECK(sigmoid(-800) > 0.0);
    CHECK(std::isfinite(logit(sigmoid(800))));
    CHECK(std::isfinite(logit(sigmoid(-800))));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-20, 20);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng);
        CHECK(std::abs(sigmoid(-x) - (1 - sigmoid(x))) <= 1e-15);
    }
    CHECK(logit(0.5) == 0);
    CHECK(logit(0.75) == doctest::Approx(std::log(3.0)).epsilon(1e-15));
    for (double x = -30; x <= 30; x += 0.37) {
        // For large positive x, sigmoid(x) sits a few ulps below 1 and 1 - s keeps only a
        // few bits; the round trip can be no better than ulp(1) / (1 - s) there.
        const double s = sigmoid(x);
        const double tol = std::max(1e-9, 4 * 0x1p-52 / (1 - s));
        CHECK(std::abs(logit(s) - x) <= tol);
        if (x <= 12) CHECK(std::abs(logit(s) - x) <= 1e-9);
    }
    for (double x = -10; x <= 10; x += 0.5) CHECK(sigmoid(x) == doctest::Approx(oracle::sigmoid(x)).epsilon(1e-15));
    CHECK_THROWS_AS(logit(0.0), DomainError);
    CHECK_THROWS_AS(logit(1.0), DomainError);
    CHECK_THROWS_AS(logit(-0.1), DomainError);
}

TEST_CASE("cubic surrogate") {
    CHECK(poly_sigmoid(0) == 0.5);
    CHECK(poly_sigmoid(1) == doctest::Approx(0.693775).epsilon(1e-12));
    CHECK(poly_sigmoid(-2.5) == doctest::Approx(1.0 - poly_sigmoid(2.5)));
    CHECK(apply_sigmoid(SigmoidImpl::poly, 1.5) == poly_sigmoid(1.5));
    for (double x = 0.1; x < 5; x += 0.3) CHECK(poly_sigmoid(-x) - 0.5 == doctest::Approx(-(poly_sigmoid(x) - 0.5)));
    CHECK(std::abs(poly_sigmoid(0) - sigmoid(0)) == 0);
}

TEST_CASE("surrogate error oracle") {
    const double e = poly_sigmoid_error_oracle(1e-3);
    CHECK(e == doctest::Approx(0.06023214907571517).epsilon(1e-9));
    CHECK(poly_sigmoid_error_oracle(1e-3, kernels::Backend::serial) == e);
    // The maximum sits at the interval ends, so refining the grid changes nothing.
    CHECK(poly_sigmoid_error_oracle(5e-4) == doctest::Approx(e).epsilon(1e-12));
    CHECK_THROWS_AS(poly_sigmoid_error_oracle(0.0), ContractViolation);
    CHECK_THROWS_AS(poly_sigmoid_error_oracle(0.5), ContractViolation);
}

TEST_CASE("delta") {
    CHECK(delta(0.5, 0.0) == 0.125);
    CHECK(delta(0.0, 1.0) == 0.0);
    CHECK(delta(1.0, 0.0) == 0.0);
    // matches the second derivative of (sigmoid(z) - y)^2 by finite differences
    for (double z = -4; z <= 4; z += 0.5)
        for (double y : {0.0, 0.3, 1.0}) {
            auto f = [&](double t) { return (oracle::sigmoid(t) - y) * (oracle::sigmoid(t) - y); };
            const double h = 1e-4;
            const double fd = (f(z + h) - 2 * f(z) + f(z - h)) / (h * h);
            CHECK(delta(sigmoid(z), y) == doctest::Approx(fd).epsilon(1e-5).scale(1));
        }
}

TEST_CASE("delta bound oracle") {
    const auto rep = delta_bound_oracle(1e-3);
    CHECK(rep.max_abs_delta <= kDeltaBound);
    CHECK(rep.max_abs_delta == doctest::Approx(0.15405828809600003).epsilon(1e-12));
    CHECK(std::abs(delta(rep.argmax_sigma, rep.argmax_y)) == rep.max_abs_delta);
    const auto ser = delta_bound_oracle(1e-3, kernels::Backend::serial);
    CHECK(ser.max_abs_delta == rep.max_abs_delta);
    CHECK_THROWS_AS(delta_bound_oracle(0.01), ContractViolation);
}
