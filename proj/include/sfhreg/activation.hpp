#pragma once

#include "sfhreg/kernels.hpp"

namespace sfhreg {

// Coefficients of the cubic least-squares surrogate for the sigmoid on [-5, 5].
inline constexpr double kPolySigmoidC0 = 0.5;
inline constexpr double kPolySigmoidC1 = 0.19824;
inline constexpr double kPolySigmoidC3 = -0.0044650;

// Global bound on |Δ| used to build the LFFR fixed Hessian.
inline constexpr double kDeltaBound = 0.155;

enum class SigmoidImpl { exact, poly };

double sigmoid(double x) noexcept;

// ln(y / (1 - y)); DomainError unless 0 < y < 1.
double logit(double y);

// 0.5 + 0.19824 x - 0.0044650 x^3. Only meaningful on [-5, 5].
double poly_sigmoid(double x) noexcept;

inline double apply_sigmoid(SigmoidImpl impl, double x) noexcept {
    return impl == SigmoidImpl::exact ? sigmoid(x) : poly_sigmoid(x);
}

// Max |poly_sigmoid(x) - sigmoid(x)| over the grid -5, -5 + step, ..., 5.
double poly_sigmoid_error_oracle(double grid_step, kernels::Backend backend = kernels::Backend::openmp);

// Curvature coefficient of (sigmoid(z) - y)^2 with respect to z:
// (4s - 6s^2 - 2y + 4ys) s (1 - s). The per-sample Hessian of the L2 loss is Δ x xᵀ.
double delta(double sigma_val, double y) noexcept;

struct CurvatureBoundReport {
    double max_abs_delta = 0.0;
    double argmax_sigma = 0.0;
    double argmax_y = 0.0;
    double grid_step = 0.0;
};

// Exhaustive max of |delta(s, y)| on the grid {0, step, ..., 1}^2.
CurvatureBoundReport delta_bound_oracle(double grid_step, kernels::Backend backend = kernels::Backend::openmp);

}  // namespace sfhreg
