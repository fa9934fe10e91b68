#pragma once

// Slotted-ciphertext simulator.
//
// Values are plain doubles in a fixed-length slot vector; what is simulated is
// the computation model of a CKKS-style scheme: only slotwise add/sub/mult,
// plaintext-constant mult, cyclic rotation and bootstrapping are available,
// every multiplication is followed by a rescale that costs one level, and a
// ciphertext at level 0 cannot be multiplied again until it is bootstrapped.
// Every operation is appended to an op log with provenance ids so a run can be
// audited and its level usage replayed.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sfhreg/data.hpp"
#include "sfhreg/linalg.hpp"
#include "sfhreg/models.hpp"
#include "sfhreg/random.hpp"
#include "sfhreg/sfh.hpp"

namespace sfhreg::hesim {

// Defaults follow logN = 16 (32768 slots) and logQ / logp = 1200 / 30 = 40 levels.
struct SimParams {
    std::size_t slot_count = 32768;
    int initial_levels = 40;
    int scale_exp_unit = 30;
    bool bootstrap_enabled = true;
    double noise_std = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class OpKind { encrypt, add, sub, mult, cmult, rotate, bootstrap };

std::string_view to_string(OpKind op) noexcept;

struct OpRecord {
    OpKind op = OpKind::encrypt;
    std::uint64_t input_a = 0;  // 0: no input
    std::uint64_t input_b = 0;
    int level_a = 0;
    int level_b = 0;
    std::uint64_t output = 0;
    int output_level = 0;
    std::string site;
};

class HeSimulator;

class CipherVector {
public:
    std::span<const double> slots() const noexcept { return *slots_; }
    std::size_t slot_count() const noexcept { return slots_->size(); }
    int level() const noexcept { return level_; }
    int scale_exp() const noexcept { return scale_exp_; }
    std::uint64_t id() const noexcept { return id_; }

private:
    friend class HeSimulator;
    CipherVector(std::shared_ptr<const std::vector<double>> slots, int level, int scale_exp, std::uint64_t id)
        : slots_(std::move(slots)), level_(level), scale_exp_(scale_exp), id_(id) {}

    std::shared_ptr<const std::vector<double>> slots_;
    int level_;
    int scale_exp_;
    std::uint64_t id_;
};

class HeSimulator {
public:
    explicit HeSimulator(SimParams params);

    const SimParams& params() const noexcept { return params_; }

    // Zero-padded to slot_count; level = initial_levels.
    CipherVector encrypt(std::span<const double> values, std::string_view site = "encrypt");
    // Same, at an explicit scale exponent instead of scale_exp_unit.
    CipherVector encrypt(std::span<const double> values, int scale_exp, std::string_view site);
    // Row-major packing over ceil(rows * cols / slot_count) ciphertexts.
    std::vector<CipherVector> encrypt(const Matrix& m, std::string_view site = "encrypt");

    std::vector<double> decrypt(const CipherVector& ct) const;
    Matrix decrypt(const std::vector<CipherVector>& cts, std::size_t rows, std::size_t cols) const;

    CipherVector add(const CipherVector& a, const CipherVector& b, std::string_view site = "add");
    CipherVector sub(const CipherVector& a, const CipherVector& b, std::string_view site = "sub");
    CipherVector mult(const CipherVector& a, const CipherVector& b, std::string_view site = "mult");
    // Multiply by a plaintext vector (zero-padded); costs one level like mult.
    CipherVector cmult(const CipherVector& a, std::span<const double> constant, std::string_view site = "cmult");
    CipherVector cmult(const CipherVector& a, double constant, std::string_view site = "cmult");
    // Cyclic left shift: out[s] = a[(s + k) mod slot_count]. Negative k shifts right.
    CipherVector rotate(const CipherVector& a, long k, std::string_view site = "rotate");
    CipherVector bootstrap(const CipherVector& a, std::string_view site = "bootstrap");

    // Every slot of each row block of width row_width ends up holding that block's sum.
    // log2(row_width) rotate-and-add steps; when 1 < row_width < slot_count the block
    // sums are isolated with a mask (one cmult, one level) and spread back with another
    // log2(row_width) steps.
    CipherVector sum_columns(const CipherVector& ct, std::size_t row_width, std::string_view site = "sum_columns");
    // Sums all row blocks slotwise; every block ends up holding the column totals.
    // log2(slot_count / row_width) rotate-and-add steps, no levels.
    CipherVector sum_rows(const CipherVector& ct, std::size_t row_width, std::string_view site = "sum_rows");

    std::uint64_t bootstrap_count() const noexcept { return bootstraps_; }
    std::uint64_t mult_count() const noexcept { return mults_; }
    std::uint64_t rotation_count() const noexcept { return rotations_; }
    const std::vector<OpRecord>& log() const noexcept { return log_; }

private:
    CipherVector make(std::vector<double> slots, int level, int scale_exp);
    void record(OpKind op, const CipherVector* a, const CipherVector* b, const CipherVector& out, std::string_view site);
    void check_slots(const CipherVector& a, const CipherVector& b, std::string_view site) const;
    void check_level(const CipherVector& a, std::string_view op, std::string_view site) const;
    void add_noise(std::vector<double>& slots);

    SimParams params_;
    Xoshiro256pp rng_;
    std::uint64_t next_id_ = 1;
    std::uint64_t bootstraps_ = 0;
    std::uint64_t mults_ = 0;
    std::uint64_t rotations_ = 0;
    std::vector<OpRecord> log_;
};

// ---------------------------------------------------------------------------
// Encrypted training

enum class HeKind { linear, ynorm_linear, improved_lffr, lffr_poly };

std::string_view to_string(HeKind k) noexcept;
HeKind he_kind_from_string(std::string_view s);
ModelKind model_kind(HeKind k) noexcept;

struct EncodedLayout {
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t c = 0;
    std::size_t row_width = 0;  // 1+d rounded up to a power of two
    std::size_t rows_per_ciphertext = 0;
    std::size_t ciphertexts = 0;
};

// What the data owner uploads. ct_x holds the design matrix with rows padded to
// row_width; ct_y[j] holds target column j with y_ij repeated across row i's block;
// ct_beta[j] and ct_bbar hold w_j and the inverse SFH diagonal repeated in every block.
struct EncodedDataset {
    std::vector<CipherVector> ct_x;
    std::vector<std::vector<CipherVector>> ct_y;
    std::vector<CipherVector> ct_beta;
    CipherVector ct_bbar;
    CipherVector ct_half;
    CipherVector ct_one;
    EncodedLayout layout;
};

EncodedLayout plan_layout(std::size_t n, std::size_t d, std::size_t c, std::size_t slot_count);

// x: n x (1+d); targets: n x c (already transformed); w0: c x (1+d).
EncodedDataset encode_dataset(HeSimulator& sim, const Matrix& x, const Matrix& targets, const SfhDiagonal& sfh,
                              const Matrix& w0);

struct LevelReport {
    std::vector<int> levels_per_iteration;  // levels the weight ciphertext spent per iteration
    std::uint64_t bootstrap_count = 0;
    std::uint64_t total_mults = 0;  // mult + cmult
    std::uint64_t total_rotations = 0;
    int initial_levels = 0;
};

// Levels one iteration takes from the weight ciphertext for this kind and layout.
int iteration_depth(HeKind kind, const EncodedLayout& layout, std::size_t slot_count);

// Bootstraps needed over `iterations` when a weight ciphertext is refreshed only once
// its level drops below `depth`, times the number of outputs.
std::uint64_t predicted_bootstraps(std::size_t iterations, int depth, int initial_levels, std::size_t outputs);

struct EncryptedTrainResult {
    ModelBundle model;
    TrainTrace trace;  // MSEs from instrumentation decrypts; not part of the op log
    LevelReport levels;
    std::vector<OpRecord> op_log;
    std::vector<Matrix> gradients;  // decrypted per-iteration gradients, with record_weights
};

// Client side: targets transformed and B̄ built in the clear, everything encrypted.
// Cloud side: κ fixed-Hessian iterations using only simulator operations, with a
// bootstrap of a weight ciphertext whenever its level cannot cover another iteration.
// Uses cfg.iterations, epsilon, gamma, record_weights.
EncryptedTrainResult encrypted_train(const Dataset& data, HeKind kind, const TrainConfig& cfg, const SimParams& params);

// Replays an op log against the level rules. Every input must have been produced by an
// earlier record, every output level must follow from its inputs, and no level may be
// negative.
struct LedgerReplay {
    bool consistent = true;
    std::string first_violation;
    std::uint64_t bootstraps = 0;
    std::uint64_t level_decrements = 0;
};

LedgerReplay replay_ledger(const std::vector<OpRecord>& log, const SimParams& params);

}  // namespace sfhreg::hesim
