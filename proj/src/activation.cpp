#include "sfhreg/activation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sfhreg/error.hpp"

namespace sfhreg {

// Saturated values are held strictly inside (0, 1) so logit stays finite.
double sigmoid(double x) noexcept {
    constexpr double below_one = 1.0 - 0x1p-53;
    if (x >= 0.0) return std::min(1.0 / (1.0 + std::exp(-x)), below_one);
    const double e = std::exp(x);
    return std::max(e / (1.0 + e), std::numeric_limits<double>::denorm_min());
}

double logit(double y) {
    if (!(y > 0.0 && y < 1.0)) throw DomainError("logit: argument " + std::to_string(y) + " outside (0, 1)");
    return std::log(y / (1.0 - y));
}

double poly_sigmoid(double x) noexcept {
    return kPolySigmoidC0 + kPolySigmoidC1 * x + kPolySigmoidC3 * x * x * x;
}

double delta(double s, double y) noexcept {
    return (4.0 * s - 6.0 * s * s - 2.0 * y + 4.0 * y * s) * s * (1.0 - s);
}

namespace {

// Number of grid intervals covering `length` with `step`, rounded to the nearest integer.
long intervals(double length, double step) { return std::lround(length / step); }

}  // namespace

double poly_sigmoid_error_oracle(double grid_step, kernels::Backend backend) {
    if (!(grid_step > 0.0 && grid_step <= 0.01))
        throw ContractViolation("poly_sigmoid_error_oracle: grid_step must be in (0, 0.01]");
    const long m = intervals(10.0, grid_step);
    auto err = [&](long k) {
        const double x = (k == m) ? 5.0 : -5.0 + static_cast<double>(k) * grid_step;
        return std::abs(poly_sigmoid(x) - sigmoid(x));
    };

    double best = 0.0;
    if (backend == kernels::Backend::serial) {
        for (long k = 0; k <= m; ++k) best = std::max(best, err(k));
    } else {
#pragma omp parallel for reduction(max : best) schedule(static)
        for (long k = 0; k <= m; ++k) best = std::max(best, err(k));
    }
    return best;
}

CurvatureBoundReport delta_bound_oracle(double grid_step, kernels::Backend backend) {
    if (!(grid_step > 0.0 && grid_step <= 1e-3))
        throw ContractViolation("delta_bound_oracle: grid_step must be in (0, 1e-3]");
    const long m = intervals(1.0, grid_step);
    auto coord = [&](long k) { return k == m ? 1.0 : static_cast<double>(k) * grid_step; };

    // Per-row maxima, then an ordered scan; ties resolve to the smallest (s, y).
    std::vector<double> row_best(static_cast<std::size_t>(m + 1), -1.0);
    std::vector<long> row_arg(static_cast<std::size_t>(m + 1), 0);
    auto scan_row = [&](long a) {
        const double s = coord(a);
        double best = -1.0;
        long arg = 0;
        for (long b = 0; b <= m; ++b) {
            const double v = std::abs(delta(s, coord(b)));
            if (v > best) {
                best = v;
                arg = b;
            }
        }
        row_best[static_cast<std::size_t>(a)] = best;
        row_arg[static_cast<std::size_t>(a)] = arg;
    };

    if (backend == kernels::Backend::serial) {
        for (long a = 0; a <= m; ++a) scan_row(a);
    } else {
#pragma omp parallel for schedule(static)
        for (long a = 0; a <= m; ++a) scan_row(a);
    }

    CurvatureBoundReport rep;
    rep.grid_step = grid_step;
    rep.max_abs_delta = -1.0;
    for (long a = 0; a <= m; ++a) {
        if (row_best[static_cast<std::size_t>(a)] > rep.max_abs_delta) {
            rep.max_abs_delta = row_best[static_cast<std::size_t>(a)];
            rep.argmax_sigma = coord(a);
            rep.argmax_y = coord(row_arg[static_cast<std::size_t>(a)]);
        }
    }
    return rep;
}

}  // namespace sfhreg
