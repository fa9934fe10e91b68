#include "sfhreg/models.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "sfhreg/error.hpp"

namespace sfhreg {

std::string_view to_string(ModelKind k) noexcept {
    switch (k) {
        case ModelKind::linear: return "linear";
        case ModelKind::ynorm_linear: return "ynorm_linear";
        case ModelKind::lffr: return "lffr";
        case ModelKind::improved_lffr: return "improved_lffr";
    }
    return "linear";
}

ModelKind model_kind_from_string(std::string_view s) {
    if (s == "linear") return ModelKind::linear;
    if (s == "ynorm" || s == "ynorm_linear") return ModelKind::ynorm_linear;
    if (s == "lffr") return ModelKind::lffr;
    if (s == "improved" || s == "improved_lffr") return ModelKind::improved_lffr;
    throw ContractViolation("unknown model kind '" + std::string(s) + "'");
}

void ModelBundle::validate() const {
    require_finite(weights, "model weights");
    if (kind != ModelKind::linear) {
        if (!norm) throw ContractViolation(std::string(to_string(kind)) + " model requires norm params");
        if (norm->outputs() != weights.rows())
            throw ContractViolation("norm params cover " + std::to_string(norm->outputs()) + " outputs, weights have " +
                                    std::to_string(weights.rows()));
    }
    if (scaling.features() != weights.cols() - 1)
        throw ContractViolation("feature scaling covers " + std::to_string(scaling.features()) +
                                " features, weights expect " + std::to_string(weights.cols() - 1));
}

namespace {

void check_shapes(const Matrix& x, const Matrix& y, const Matrix& w, const char* who) {
    if (y.rows() != x.rows() || w.cols() != x.cols() || w.rows() != y.cols())
        throw ContractViolation(std::string(who) + ": inconsistent shapes X " + std::to_string(x.rows()) + "x" +
                                std::to_string(x.cols()) + ", Y " + std::to_string(y.rows()) + "x" +
                                std::to_string(y.cols()) + ", W " + std::to_string(w.rows()) + "x" +
                                std::to_string(w.cols()));
}

// 2 (z - y), the per-sample gradient weight of L0.
Matrix linear_residual_weights(const Matrix& z, const Matrix& y) {
    Matrix r(z.rows(), z.cols());
    for (std::size_t e = 0; e < r.size(); ++e) r.data()[e] = 2.0 * (z.data()[e] - y.data()[e]);
    return r;
}

// 2 (s - ȳ) * (s (1 - s)), the per-sample gradient weight of L2 with s = σ(z).
Matrix lffr_residual_weights(const Matrix& z, const Matrix& ybar, SigmoidImpl impl) {
    Matrix r(z.rows(), z.cols());
    for (std::size_t e = 0; e < r.size(); ++e) {
        const double s = apply_sigmoid(impl, z.data()[e]);
        const double resid = s - ybar.data()[e];
        r.data()[e] = (resid + resid) * (s * (1.0 - s));
    }
    return r;
}

double max_norm(const Matrix& m) { return max_abs(m); }

void check_config(const TrainConfig& cfg) {
    if (cfg.iterations < 1) throw ContractViolation("iterations must be >= 1");
    if (!(cfg.epsilon > 0.0)) throw ContractViolation("epsilon must be > 0");
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ContractViolation("gamma must be in (0, 1)");
}

enum class Objective { linear, lffr };

using ScoreMap = std::function<double(double, std::size_t)>;

struct LoopInputs {
    const Matrix& x;
    const Matrix& targets;     // what the loss is fitted to
    const Matrix* original_y;  // null: original space == target space
    const SharedSfh& sfh;
    Objective objective;
    ScoreMap to_original;
};

TrainTrace run_loop(const LoopInputs& in, const TrainConfig& cfg, Matrix& w) {
    const auto backend = cfg.backend;
    const std::size_t c = in.targets.cols();
    TrainTrace trace;
    trace.records.reserve(cfg.iterations);

    Matrix z = kernels::scores(backend, in.x, w);
    for (std::size_t it = 1; it <= cfg.iterations; ++it) {
        const Matrix r = in.objective == Objective::linear ? linear_residual_weights(z, in.targets)
                                                           : lffr_residual_weights(z, in.targets, cfg.sigmoid);
        const Matrix g = kernels::weighted_row_sums(backend, in.x, r);
        w = fixed_hessian_step(w, g, in.sfh, it);
        z = kernels::scores(backend, in.x, w);

        Matrix pred_t = z;
        if (in.objective == Objective::lffr)
            for (auto& v : pred_t.data()) v = apply_sigmoid(cfg.sigmoid, v);
        TraceRecord rec;
        rec.iter = it;
        rec.grad_maxnorm = max_norm(g);
        rec.mse_transformed = mse(pred_t, in.targets);
        if (in.original_y) {
            Matrix pred_o(z.rows(), c);
            for (std::size_t i = 0; i < z.rows(); ++i)
                for (std::size_t j = 0; j < c; ++j) pred_o(i, j) = in.to_original(z(i, j), j);
            rec.mse_original = mse(pred_o, *in.original_y);
        } else {
            rec.mse_original = rec.mse_transformed;
        }
        trace.records.push_back(rec);
        if (cfg.record_weights) trace.weights.push_back(w);
    }
    return trace;
}

Matrix initial_weights(const TrainConfig& cfg, std::size_t outputs, std::size_t cols) {
    if (!cfg.initial_weights) return Matrix(outputs, cols);
    const Matrix& w0 = *cfg.initial_weights;
    if (w0.rows() != outputs || w0.cols() != cols)
        throw ContractViolation("initial weights must be " + std::to_string(outputs) + "x" + std::to_string(cols));
    require_finite(w0, "initial weights");
    return w0;
}

}  // namespace

double loss_linear(const Matrix& x, const Matrix& y, const Matrix& w) {
    check_shapes(x, y, w, "loss_linear");
    const Matrix z = kernels::serial::scores(x, w);
    double s = 0.0;
    for (std::size_t e = 0; e < z.size(); ++e) {
        const double r = z.data()[e] - y.data()[e];
        s += r * r;
    }
    return s;
}

double loss_lffr(const Matrix& x, const Matrix& ybar, const Matrix& w, SigmoidImpl impl) {
    check_shapes(x, ybar, w, "loss_lffr");
    const Matrix z = kernels::serial::scores(x, w);
    double s = 0.0;
    for (std::size_t e = 0; e < z.size(); ++e) {
        const double r = apply_sigmoid(impl, z.data()[e]) - ybar.data()[e];
        s += r * r;
    }
    return s;
}

Matrix grad_linear(const Matrix& x, const Matrix& y, const Matrix& w, kernels::Backend backend) {
    check_shapes(x, y, w, "grad_linear");
    const Matrix z = kernels::scores(backend, x, w);
    return kernels::weighted_row_sums(backend, x, linear_residual_weights(z, y));
}

Matrix grad_lffr(const Matrix& x, const Matrix& ybar, const Matrix& w, SigmoidImpl impl, kernels::Backend backend) {
    check_shapes(x, ybar, w, "grad_lffr");
    const Matrix z = kernels::scores(backend, x, w);
    return kernels::weighted_row_sums(backend, x, lffr_residual_weights(z, ybar, impl));
}

Matrix fixed_hessian_step(const Matrix& w, const Matrix& grad, const SharedSfh& sfh, std::size_t iteration) {
    if (grad.rows() != w.rows() || grad.cols() != w.cols())
        throw ContractViolation("fixed_hessian_step: gradient shape differs from weights");
    if (sfh.outputs() != w.rows() || sfh.diagonal().size() != w.cols())
        throw ContractViolation("fixed_hessian_step: SFH is " + std::to_string(sfh.outputs()) + " blocks of " +
                                std::to_string(sfh.diagonal().size()) + ", weights are " + std::to_string(w.rows()) +
                                "x" + std::to_string(w.cols()));
    Matrix out = w;
    for (std::size_t j = 0; j < w.rows(); ++j) {
        const auto inv = sfh.inverse_block(j);
        for (std::size_t k = 0; k < w.cols(); ++k) {
            out(j, k) = w(j, k) - grad(j, k) * inv[k];
            if (!std::isfinite(out(j, k)))
                throw DivergenceError(iteration, "weight (" + std::to_string(j) + ", " + std::to_string(k) +
                                                     ") is not finite");
        }
    }
    return out;
}

Matrix improved_lffr_targets(const Matrix& ybar, double gamma) {
    Matrix t(ybar.rows(), ybar.cols());
    for (std::size_t e = 0; e < t.size(); ++e) t.data()[e] = logit(ybar.data()[e] * gamma + 0.5 - gamma / 2.0);
    return t;
}

Matrix transformed_targets(ModelKind kind, const Matrix& y, const std::optional<NormParams>& norm, TargetLink link) {
    if (kind == ModelKind::linear) return y;
    if (kind == ModelKind::improved_lffr && link == TargetLink::identity) return y;
    if (!norm) throw ContractViolation("transformed_targets: norm params required");
    Matrix ybar(y.rows(), y.cols());
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j) ybar(i, j) = (y(i, j) - norm->y_min[j]) / norm->span(j);
    if (kind == ModelKind::improved_lffr) return improved_lffr_targets(ybar, norm->gamma);
    return ybar;
}

TrainResult train_linear_on_targets(const Matrix& x, const Matrix& targets, const TrainConfig& cfg) {
    check_config(cfg);
    require_finite(x, "train features");
    require_finite(targets, "train targets");
    Matrix w = initial_weights(cfg, targets.cols(), x.cols());
    check_shapes(x, targets, w, "train_linear_on_targets");
    const SharedSfh sfh = replicate_for_outputs(build_sfh_linear(x, cfg.epsilon, cfg.backend), targets.cols());

    LoopInputs in{x, targets, nullptr, sfh, Objective::linear, {}};
    TrainResult out;
    out.trace = run_loop(in, cfg, w);
    out.model.kind = ModelKind::linear;
    out.model.weights = std::move(w);
    return out;
}

TrainResult train(const Dataset& data, ModelKind kind, const TrainConfig& cfg) {
    check_config(cfg);
    data.validate();

    ModelBundle bundle;
    bundle.kind = kind;
    bundle.scaling = data.scaling;
    bundle.link = cfg.link;
    if (kind != ModelKind::linear) bundle.norm = normalize_targets(data.y, cfg.epsilon, cfg.gamma).second;

    const Matrix targets = transformed_targets(kind, data.y, bundle.norm, cfg.link);
    Matrix w = initial_weights(cfg, data.outputs(), data.x.cols());

    const SfhDiagonal diag = kind == ModelKind::lffr ? build_sfh_lffr(data.x, cfg.epsilon, cfg.backend)
                                                     : build_sfh_linear(data.x, cfg.epsilon, cfg.backend);
    const SharedSfh sfh = replicate_for_outputs(diag, data.outputs());

    bundle.weights = w;  // shape only; score_to_original reads kind/norm/link
    LoopInputs in{data.x,
                  targets,
                  kind == ModelKind::linear ? nullptr : &data.y,
                  sfh,
                  kind == ModelKind::lffr ? Objective::lffr : Objective::linear,
                  [&bundle](double z, std::size_t j) { return score_to_original(bundle, z, j); }};

    TrainResult out;
    out.trace = run_loop(in, cfg, w);
    bundle.weights = std::move(w);
    out.model = std::move(bundle);
    return out;
}

double score_to_original(const ModelBundle& b, double z, std::size_t j) {
    switch (b.kind) {
        case ModelKind::linear: return z;
        case ModelKind::ynorm_linear: return denormalize_prediction(z, *b.norm, j);
        case ModelKind::lffr: return denormalize_prediction(sigmoid(z), *b.norm, j);
        case ModelKind::improved_lffr: {
            if (b.link == TargetLink::identity) return z;
            const double g = b.norm->gamma;
            return b.norm->span(j) * ((sigmoid(z) - 0.5 + g / 2.0) / g) + b.norm->y_min[j];
        }
    }
    return z;
}

std::vector<double> predict(const ModelBundle& b, std::span<const double> x) {
    if (x.size() != b.weights.cols())
        throw ContractViolation("predict: sample has " + std::to_string(x.size()) + " entries, model expects " +
                                std::to_string(b.weights.cols()) + " (bias included)");
    if (b.kind != ModelKind::linear && !b.norm) throw ContractViolation("predict: model lacks norm params");
    std::vector<double> out(b.outputs());
    for (std::size_t j = 0; j < b.outputs(); ++j) {
        double z = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) z += b.weights(j, k) * x[k];
        out[j] = score_to_original(b, z, j);
    }
    return out;
}

Matrix predict(const ModelBundle& b, const Matrix& x) {
    if (x.cols() != b.weights.cols())
        throw ContractViolation("predict: data has " + std::to_string(x.cols() - 1) + " features, model expects " +
                                std::to_string(b.weights.cols() - 1));
    Matrix out(x.rows(), b.outputs());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto p = predict(b, x.row(i));
        std::copy(p.begin(), p.end(), out.row(i).begin());
    }
    return out;
}

double mse(const Matrix& p, const Matrix& y) {
    if (p.rows() != y.rows() || p.cols() != y.cols()) throw ContractViolation("mse: shape mismatch");
    double s = 0.0;
    for (std::size_t e = 0; e < p.size(); ++e) {
        const double r = p.data()[e] - y.data()[e];
        s += r * r;
    }
    return s / static_cast<double>(p.size());
}

std::vector<double> mse_per_output(const Matrix& p, const Matrix& y) {
    if (p.rows() != y.rows() || p.cols() != y.cols()) throw ContractViolation("mse: shape mismatch");
    std::vector<double> out(p.cols(), 0.0);
    for (std::size_t i = 0; i < p.rows(); ++i)
        for (std::size_t j = 0; j < p.cols(); ++j) {
            const double r = p(i, j) - y(i, j);
            out[j] += r * r;
        }
    for (auto& v : out) v /= static_cast<double>(p.rows());
    return out;
}

}  // namespace sfhreg
