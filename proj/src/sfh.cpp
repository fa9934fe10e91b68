#include "sfhreg/sfh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sfhreg/activation.hpp"
#include "sfhreg/error.hpp"

namespace sfhreg {

std::string_view to_string(LossKind k) noexcept {
    switch (k) {
        case LossKind::linear: return "linear";
        case LossKind::lffr: return "lffr";
        case LossKind::hessian: return "hessian";
    }
    return "linear";
}

LossKind loss_kind_from_string(std::string_view s) {
    if (s == "linear") return LossKind::linear;
    if (s == "lffr") return LossKind::lffr;
    if (s == "hessian") return LossKind::hessian;
    throw ContractViolation("unknown loss kind '" + std::string(s) + "'");
}

SfhDiagonal SfhDiagonal::from_entries(std::vector<double> entries, LossKind kind, double epsilon) {
    if (!(epsilon > 0.0)) throw ContractViolation("SFH epsilon must be > 0");
    SfhDiagonal d;
    d.loss_kind = kind;
    d.epsilon = epsilon;
    d.inverse_entries.reserve(entries.size());
    for (double e : entries) {
        if (!(e >= epsilon) || !std::isfinite(e)) throw ContractViolation("SFH entry below epsilon or non-finite");
        d.inverse_entries.push_back(1.0 / e);
    }
    d.entries = std::move(entries);
    return d;
}

namespace {

SfhDiagonal scaled_abs_products(const Matrix& x, double factor, double epsilon, LossKind kind,
                                kernels::Backend backend) {
    require_finite(x, "build_sfh");
    if (!(epsilon > 0.0)) throw ContractViolation("SFH epsilon must be > 0");
    auto sums = kernels::abs_product_sums(backend, x);
    for (auto& s : sums) s = epsilon + factor * s;
    return SfhDiagonal::from_entries(std::move(sums), kind, epsilon);
}

}  // namespace

SfhDiagonal build_sfh_linear(const Matrix& x, double epsilon, kernels::Backend backend) {
    return scaled_abs_products(x, 2.0, epsilon, LossKind::linear, backend);
}

SfhDiagonal build_sfh_lffr(const Matrix& x, double epsilon, kernels::Backend backend) {
    return scaled_abs_products(x, kDeltaBound, epsilon, LossKind::lffr, backend);
}

SfhDiagonal build_quadratic_gradient_diag(const Matrix& h, double epsilon) {
    if (!h.is_square()) throw ContractViolation("build_quadratic_gradient_diag: H is not square");
    require_finite(h, "build_quadratic_gradient_diag");
    const double scale = std::max(1.0, max_abs(h));
    std::vector<double> entries(h.rows(), epsilon);
    for (std::size_t k = 0; k < h.rows(); ++k)
        for (std::size_t i = 0; i < h.cols(); ++i) {
            if (std::abs(h(k, i) - h(i, k)) > 1e-9 * scale)
                throw ContractViolation("build_quadratic_gradient_diag: H is not symmetric");
            entries[k] += std::abs(h(k, i));
        }
    return SfhDiagonal::from_entries(std::move(entries), LossKind::hessian, epsilon);
}

SharedSfh::SharedSfh(std::shared_ptr<const SfhDiagonal> diag, std::size_t outputs)
    : diag_(std::move(diag)), outputs_(outputs) {
    if (!diag_) throw ContractViolation("SharedSfh: null diagonal");
    if (outputs_ == 0) throw ContractViolation("SharedSfh: need at least one output");
}

std::span<const double> SharedSfh::block(std::size_t output) const {
    if (output >= outputs_) throw ContractViolation("SharedSfh: output index out of range");
    return diag_->entries;
}

std::span<const double> SharedSfh::inverse_block(std::size_t output) const {
    if (output >= outputs_) throw ContractViolation("SharedSfh: output index out of range");
    return diag_->inverse_entries;
}

Matrix SharedSfh::materialize() const { return kron(Matrix::identity(outputs_), diag_->matrix()); }

SharedSfh replicate_for_outputs(SfhDiagonal diag, std::size_t outputs) {
    return SharedSfh(std::make_shared<const SfhDiagonal>(std::move(diag)), outputs);
}

}  // namespace sfhreg
