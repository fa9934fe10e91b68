#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "sfhreg/kernels.hpp"
#include "sfhreg/linalg.hpp"

namespace sfhreg {

// Which objective the diagonal bounds. `hessian` is a diagonal built directly
// from an explicit Hessian by absolute row sums.
enum class LossKind { linear, lffr, hessian };

std::string_view to_string(LossKind k) noexcept;
LossKind loss_kind_from_string(std::string_view s);

// Diagonal Hessian substitute B̄ for one output block. Every entry is >= epsilon > 0.
struct SfhDiagonal {
    std::vector<double> entries;
    std::vector<double> inverse_entries;
    LossKind loss_kind = LossKind::linear;
    double epsilon = 1e-8;

    std::size_t size() const noexcept { return entries.size(); }
    Matrix matrix() const { return Matrix::diagonal(entries); }

    static SfhDiagonal from_entries(std::vector<double> entries, LossKind kind, double epsilon);
};

// B̄_kk = eps + 2 * sum_j sum_i |x_ij x_ik|. Dominates the L0 block Hessian 2XᵀX.
SfhDiagonal build_sfh_linear(const Matrix& x, double epsilon,
                             kernels::Backend backend = kernels::Backend::openmp);

// B̄_kk = eps + 0.155 * sum_j sum_i |x_ij x_ik|. Dominates Σ Δ_i x_i x_iᵀ for any weights.
SfhDiagonal build_sfh_lffr(const Matrix& x, double epsilon,
                           kernels::Backend backend = kernels::Backend::openmp);

// entries[k] = eps + sum_i |H_ki| for a symmetric H (minimization convention: H ⪯ diag).
SfhDiagonal build_quadratic_gradient_diag(const Matrix& h, double epsilon);

// The multi-output fixed Hessian I_c ⊗ diag(B̄): one diagonal shared by c output blocks.
class SharedSfh {
public:
    SharedSfh(std::shared_ptr<const SfhDiagonal> diag, std::size_t outputs);

    std::size_t outputs() const noexcept { return outputs_; }
    const SfhDiagonal& diagonal() const noexcept { return *diag_; }
    std::span<const double> block(std::size_t output) const;
    std::span<const double> inverse_block(std::size_t output) const;

    // Full c(1+d) x c(1+d) matrix; for small oracle checks only.
    Matrix materialize() const;

private:
    std::shared_ptr<const SfhDiagonal> diag_;
    std::size_t outputs_;
};

SharedSfh replicate_for_outputs(SfhDiagonal diag, std::size_t outputs);

}  // namespace sfhreg
