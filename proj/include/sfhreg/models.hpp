#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sfhreg/activation.hpp"
#include "sfhreg/data.hpp"
#include "sfhreg/kernels.hpp"
#include "sfhreg/linalg.hpp"
#include "sfhreg/sfh.hpp"

namespace sfhreg {

enum class ModelKind { linear, ynorm_linear, lffr, improved_lffr };

std::string_view to_string(ModelKind k) noexcept;
// Accepts the long names above and the CLI short forms "ynorm" and "improved".
ModelKind model_kind_from_string(std::string_view s);

// Link applied by improved_lffr after the γ-compressed normalization.
// `identity` skips the target transform altogether, which turns the trainer
// back into plain linear regression.
enum class TargetLink { logit, identity };

struct TrainConfig {
    std::size_t iterations = 100;
    double epsilon = 1e-8;
    double gamma = 0.5;
    SigmoidImpl sigmoid = SigmoidImpl::exact;
    TargetLink link = TargetLink::logit;
    std::optional<Matrix> initial_weights;  // c x (1+d); zeros when absent
    kernels::Backend backend = kernels::Backend::openmp;
    bool record_weights = false;  // keep W after every iteration in the trace
};

struct TraceRecord {
    std::size_t iter = 0;
    double mse_original = 0.0;
    double mse_transformed = 0.0;
    double grad_maxnorm = 0.0;
};

struct TrainTrace {
    std::vector<TraceRecord> records;
    std::vector<Matrix> weights;  // only with TrainConfig::record_weights
};

struct ModelBundle {
    ModelKind kind = ModelKind::linear;
    Matrix weights{1, 1};  // c x (1+d), row j is w_j with the bias at index 0
    std::optional<NormParams> norm;
    FeatureScaling scaling;
    TargetLink link = TargetLink::logit;

    std::size_t outputs() const noexcept { return weights.rows(); }
    std::size_t features() const noexcept { return weights.cols() - 1; }
    void validate() const;
};

struct TrainResult {
    ModelBundle model;
    TrainTrace trace;
};

// ---------------------------------------------------------------------------
// Losses and gradients. x is n x (1+d), targets n x c, w c x (1+d).

// L0 = sum_i sum_j (x_iᵀ w_j - y_ij)^2
double loss_linear(const Matrix& x, const Matrix& y, const Matrix& w);
// L2 = sum_i sum_j (σ(x_iᵀ w_j) - ȳ_ij)^2
double loss_lffr(const Matrix& x, const Matrix& ybar, const Matrix& w, SigmoidImpl impl = SigmoidImpl::exact);

// Row j: 2 sum_i (x_iᵀ w_j - y_ij) x_i
Matrix grad_linear(const Matrix& x, const Matrix& y, const Matrix& w,
                   kernels::Backend backend = kernels::Backend::openmp);

// Row j: 2 sum_i (σ_ij - ȳ_ij) σ_ij (1 - σ_ij) x_i, with σ exact or the cubic surrogate.
Matrix grad_lffr(const Matrix& x, const Matrix& ybar, const Matrix& w, SigmoidImpl impl,
                 kernels::Backend backend = kernels::Backend::openmp);

// W'[j][k] = W[j][k] - grad[j][k] * (1 / B̄_kk). DivergenceError(iteration) on a non-finite result.
Matrix fixed_hessian_step(const Matrix& w, const Matrix& grad, const SharedSfh& sfh, std::size_t iteration = 0);

// ---------------------------------------------------------------------------
// Target transforms

// logit(ȳ γ + 0.5 - γ/2), elementwise. DomainError if an argument reaches 0 or 1.
Matrix improved_lffr_targets(const Matrix& ybar, double gamma);

// The targets each kind actually regresses on.
Matrix transformed_targets(ModelKind kind, const Matrix& y, const std::optional<NormParams>& norm,
                           TargetLink link = TargetLink::logit);

// ---------------------------------------------------------------------------
// Training

// The shared fixed-Hessian loop of the linear-family trainers: SFH = build_sfh_linear(x),
// gradient = grad_linear, κ steps from the initial weights. Trace MSEs are both in the
// given target space.
TrainResult train_linear_on_targets(const Matrix& x, const Matrix& targets, const TrainConfig& cfg);

TrainResult train(const Dataset& data, ModelKind kind, const TrainConfig& cfg);

// ---------------------------------------------------------------------------
// Inference

// One sample, already scaled, bias slot included (length 1+d). Returns c predictions.
std::vector<double> predict(const ModelBundle& bundle, std::span<const double> x);
// All rows of a design matrix; n x c.
Matrix predict(const ModelBundle& bundle, const Matrix& x);

// Map a linear score x_iᵀ w_j back to the original target space of output j.
double score_to_original(const ModelBundle& bundle, double score, std::size_t output);

// (1 / (n c)) sum (ŷ - y)^2
double mse(const Matrix& predictions, const Matrix& y);
// Per-output mean of squared residuals.
std::vector<double> mse_per_output(const Matrix& predictions, const Matrix& y);

}  // namespace sfhreg
