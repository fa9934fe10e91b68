#include "sfhreg/hesim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_map>

#include "sfhreg/activation.hpp"
#include "sfhreg/error.hpp"

namespace sfhreg::hesim {

namespace {

// Below this many slots the OpenMP fork costs more than the loop.
constexpr std::size_t kParallelSlots = 1u << 14;

std::string site_str(std::string_view op, std::string_view site) {
    return std::string(op) + " at '" + std::string(site) + "'";
}

}  // namespace

void SimParams::validate() const {
    if (slot_count == 0 || !std::has_single_bit(slot_count))
        throw ContractViolation("slot_count must be a power of two, got " + std::to_string(slot_count));
    if (initial_levels < 1) throw ContractViolation("initial_levels must be >= 1");
    if (scale_exp_unit < 1) throw ContractViolation("scale_exp_unit must be >= 1");
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ContractViolation("noise_std must be >= 0");
}

std::string_view to_string(OpKind op) noexcept {
    switch (op) {
        case OpKind::encrypt: return "encrypt";
        case OpKind::add: return "add";
        case OpKind::sub: return "sub";
        case OpKind::mult: return "mult";
        case OpKind::cmult: return "cmult";
        case OpKind::rotate: return "rotate";
        case OpKind::bootstrap: return "bootstrap";
    }
    return "encrypt";
}

HeSimulator::HeSimulator(SimParams params) : params_(params), rng_(params.seed) { params_.validate(); }

CipherVector HeSimulator::make(std::vector<double> slots, int level, int scale_exp) {
    if (!std::all_of(slots.begin(), slots.end(), [](double v) { return std::isfinite(v); }))
        throw DivergenceError(0, "ciphertext slot became non-finite");
    return CipherVector(std::make_shared<const std::vector<double>>(std::move(slots)), level, scale_exp, next_id_++);
}

void HeSimulator::record(OpKind op, const CipherVector* a, const CipherVector* b, const CipherVector& out,
                         std::string_view site) {
    OpRecord r;
    r.op = op;
    if (a) {
        r.input_a = a->id();
        r.level_a = a->level();
    }
    if (b) {
        r.input_b = b->id();
        r.level_b = b->level();
    }
    r.output = out.id();
    r.output_level = out.level();
    r.site = std::string(site);
    log_.push_back(std::move(r));
}

void HeSimulator::check_slots(const CipherVector& a, const CipherVector& b, std::string_view site) const {
    if (a.slot_count() != b.slot_count())
        throw ContractViolation(site_str("slot count mismatch", site));
}

void HeSimulator::check_level(const CipherVector& a, std::string_view op, std::string_view site) const {
    if (a.level() < 1)
        throw LevelExhausted(site_str(op, site) + ": operand " + std::to_string(a.id()) + " is at level 0");
}

void HeSimulator::add_noise(std::vector<double>& slots) {
    if (params_.noise_std == 0.0) return;
    for (auto& v : slots) v += params_.noise_std * rng_.normal();
}

CipherVector HeSimulator::encrypt(std::span<const double> values, std::string_view site) {
    return encrypt(values, params_.scale_exp_unit, site);
}

CipherVector HeSimulator::encrypt(std::span<const double> values, int scale_exp, std::string_view site) {
    if (values.size() > params_.slot_count)
        throw ContractViolation(site_str("encrypt", site) + ": " + std::to_string(values.size()) +
                                " values exceed " + std::to_string(params_.slot_count) + " slots");
    std::vector<double> slots(params_.slot_count, 0.0);
    std::copy(values.begin(), values.end(), slots.begin());
    add_noise(slots);
    auto ct = make(std::move(slots), params_.initial_levels, scale_exp);
    record(OpKind::encrypt, nullptr, nullptr, ct, site);
    return ct;
}

std::vector<CipherVector> HeSimulator::encrypt(const Matrix& m, std::string_view site) {
    require_finite(m, "encrypt");
    const auto all = m.data();
    std::vector<CipherVector> out;
    for (std::size_t off = 0; off < all.size(); off += params_.slot_count)
        out.push_back(encrypt(all.subspan(off, std::min(params_.slot_count, all.size() - off)), site));
    return out;
}

std::vector<double> HeSimulator::decrypt(const CipherVector& ct) const {
    return {ct.slots().begin(), ct.slots().end()};
}

Matrix HeSimulator::decrypt(const std::vector<CipherVector>& cts, std::size_t rows, std::size_t cols) const {
    std::vector<double> flat;
    flat.reserve(cts.size() * params_.slot_count);
    for (const auto& ct : cts) flat.insert(flat.end(), ct.slots().begin(), ct.slots().end());
    if (flat.size() < rows * cols) throw ContractViolation("decrypt: not enough slots for the requested shape");
    flat.resize(rows * cols);
    return Matrix(rows, cols, std::move(flat));
}

namespace {

template <class F>
std::vector<double> zip(std::span<const double> a, std::span<const double> b, F f) {
    const std::size_t n = a.size();
    std::vector<double> out(n);
#pragma omp parallel for if (n >= kParallelSlots) schedule(static)
    for (std::size_t s = 0; s < n; ++s) out[s] = f(a[s], b[s]);
    return out;
}

}  // namespace

CipherVector HeSimulator::add(const CipherVector& a, const CipherVector& b, std::string_view site) {
    check_slots(a, b, site);
    if (a.scale_exp() != b.scale_exp())
        throw ScaleMismatch(site_str("add", site) + ": scales 2^" + std::to_string(a.scale_exp()) + " and 2^" +
                            std::to_string(b.scale_exp()));
    auto ct = make(zip(a.slots(), b.slots(), [](double x, double y) { return x + y; }), std::min(a.level(), b.level()),
                   a.scale_exp());
    record(OpKind::add, &a, &b, ct, site);
    return ct;
}

CipherVector HeSimulator::sub(const CipherVector& a, const CipherVector& b, std::string_view site) {
    check_slots(a, b, site);
    if (a.scale_exp() != b.scale_exp())
        throw ScaleMismatch(site_str("sub", site) + ": scales 2^" + std::to_string(a.scale_exp()) + " and 2^" +
                            std::to_string(b.scale_exp()));
    auto ct = make(zip(a.slots(), b.slots(), [](double x, double y) { return x - y; }), std::min(a.level(), b.level()),
                   a.scale_exp());
    record(OpKind::sub, &a, &b, ct, site);
    return ct;
}

CipherVector HeSimulator::mult(const CipherVector& a, const CipherVector& b, std::string_view site) {
    check_slots(a, b, site);
    check_level(a, "mult", site);
    check_level(b, "mult", site);
    // Product scale is 2^(sa + sb); the fused rescale divides by 2^unit.
    const int scale = a.scale_exp() + b.scale_exp() - params_.scale_exp_unit;
    auto ct = make(zip(a.slots(), b.slots(), [](double x, double y) { return x * y; }),
                   std::min(a.level(), b.level()) - 1, scale);
    ++mults_;
    record(OpKind::mult, &a, &b, ct, site);
    return ct;
}

CipherVector HeSimulator::cmult(const CipherVector& a, std::span<const double> constant, std::string_view site) {
    check_level(a, "cmult", site);
    if (constant.size() > a.slot_count())
        throw ContractViolation(site_str("cmult", site) + ": constant longer than the slot vector");
    std::vector<double> padded(a.slot_count(), 0.0);
    std::copy(constant.begin(), constant.end(), padded.begin());
    auto ct = make(zip(a.slots(), padded, [](double x, double y) { return x * y; }), a.level() - 1, a.scale_exp());
    ++mults_;
    record(OpKind::cmult, &a, nullptr, ct, site);
    return ct;
}

CipherVector HeSimulator::cmult(const CipherVector& a, double constant, std::string_view site) {
    const std::vector<double> c(a.slot_count(), constant);
    return cmult(a, c, site);
}

CipherVector HeSimulator::rotate(const CipherVector& a, long k, std::string_view site) {
    const auto n = static_cast<long>(a.slot_count());
    const long shift = ((k % n) + n) % n;
    const auto src = a.slots();
    std::vector<double> out(src.size());
    std::rotate_copy(src.begin(), src.begin() + shift, src.end(), out.begin());
    auto ct = make(std::move(out), a.level(), a.scale_exp());
    ++rotations_;
    record(OpKind::rotate, &a, nullptr, ct, site);
    return ct;
}

CipherVector HeSimulator::bootstrap(const CipherVector& a, std::string_view site) {
    if (!params_.bootstrap_enabled)
        throw LevelExhausted(site_str("bootstrap", site) + ": bootstrapping is disabled (level " +
                             std::to_string(a.level()) + ")");
    std::vector<double> slots(a.slots().begin(), a.slots().end());
    add_noise(slots);
    auto ct = make(std::move(slots), params_.initial_levels, a.scale_exp());
    ++bootstraps_;
    record(OpKind::bootstrap, &a, nullptr, ct, site);
    return ct;
}

CipherVector HeSimulator::sum_columns(const CipherVector& ct, std::size_t row_width, std::string_view site) {
    const std::size_t slots = ct.slot_count();
    if (row_width == 0 || !std::has_single_bit(row_width) || slots % row_width != 0)
        throw ContractViolation(site_str("sum_columns", site) + ": row width " + std::to_string(row_width) +
                                " is not a power of two dividing " + std::to_string(slots));
    if (row_width == 1) return ct;

    CipherVector acc = ct;
    for (std::size_t t = 1; t < row_width; t <<= 1)
        acc = add(acc, rotate(acc, static_cast<long>(t), site), site);
    if (row_width == slots) return acc;

    // Slot b * row_width now holds block b's sum; the rest hold partial windows.
    std::vector<double> mask(slots, 0.0);
    for (std::size_t s = 0; s < slots; s += row_width) mask[s] = 1.0;
    acc = cmult(acc, mask, site);
    for (std::size_t t = 1; t < row_width; t <<= 1)
        acc = add(acc, rotate(acc, -static_cast<long>(t), site), site);
    return acc;
}

CipherVector HeSimulator::sum_rows(const CipherVector& ct, std::size_t row_width, std::string_view site) {
    const std::size_t slots = ct.slot_count();
    if (row_width == 0 || !std::has_single_bit(row_width) || slots % row_width != 0)
        throw ContractViolation(site_str("sum_rows", site) + ": row width " + std::to_string(row_width) +
                                " is not a power of two dividing " + std::to_string(slots));
    CipherVector acc = ct;
    for (std::size_t t = row_width; t < slots; t <<= 1)
        acc = add(acc, rotate(acc, static_cast<long>(t), site), site);
    return acc;
}

// ---------------------------------------------------------------------------

std::string_view to_string(HeKind k) noexcept {
    switch (k) {
        case HeKind::linear: return "linear";
        case HeKind::ynorm_linear: return "ynorm_linear";
        case HeKind::improved_lffr: return "improved_lffr";
        case HeKind::lffr_poly: return "lffr_poly";
    }
    return "linear";
}

HeKind he_kind_from_string(std::string_view s) {
    if (s == "linear") return HeKind::linear;
    if (s == "ynorm" || s == "ynorm_linear") return HeKind::ynorm_linear;
    if (s == "improved" || s == "improved_lffr") return HeKind::improved_lffr;
    if (s == "lffr_poly") return HeKind::lffr_poly;
    throw ContractViolation("unknown encrypted kind '" + std::string(s) + "'");
}

ModelKind model_kind(HeKind k) noexcept {
    switch (k) {
        case HeKind::linear: return ModelKind::linear;
        case HeKind::ynorm_linear: return ModelKind::ynorm_linear;
        case HeKind::improved_lffr: return ModelKind::improved_lffr;
        case HeKind::lffr_poly: return ModelKind::lffr;
    }
    return ModelKind::linear;
}

EncodedLayout plan_layout(std::size_t n, std::size_t d, std::size_t c, std::size_t slot_count) {
    EncodedLayout l;
    l.n = n;
    l.d = d;
    l.c = c;
    l.row_width = std::bit_ceil(d + 1);
    if (l.row_width > slot_count)
        throw ContractViolation("a row of " + std::to_string(d + 1) + " values does not fit in " +
                                std::to_string(slot_count) + " slots");
    l.rows_per_ciphertext = slot_count / l.row_width;
    l.ciphertexts = (n + l.rows_per_ciphertext - 1) / l.rows_per_ciphertext;
    return l;
}

namespace {

// `values` (length <= row_width) repeated in every row block of a full slot vector.
std::vector<double> replicate_rows(std::span<const double> values, std::size_t row_width, std::size_t slots) {
    std::vector<double> out(slots, 0.0);
    for (std::size_t base = 0; base < slots; base += row_width)
        std::copy(values.begin(), values.end(), out.begin() + static_cast<std::ptrdiff_t>(base));
    return out;
}

}  // namespace

EncodedDataset encode_dataset(HeSimulator& sim, const Matrix& x, const Matrix& targets, const SfhDiagonal& sfh,
                              const Matrix& w0) {
    const std::size_t slots = sim.params().slot_count;
    const EncodedLayout layout = plan_layout(x.rows(), x.cols() - 1, targets.cols(), slots);
    const std::size_t width = layout.row_width;
    if (targets.rows() != x.rows() || w0.rows() != targets.cols() || w0.cols() != x.cols() || sfh.size() != x.cols())
        throw ContractViolation("encode_dataset: inconsistent shapes");

    Matrix xpad(x.rows(), width);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t k = 0; k < x.cols(); ++k) xpad(i, k) = x(i, k);
    auto ct_x = sim.encrypt(xpad, "ct_X");

    std::vector<std::vector<CipherVector>> ct_y;
    for (std::size_t j = 0; j < targets.cols(); ++j) {
        Matrix ypad(x.rows(), width);
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t k = 0; k < width; ++k) ypad(i, k) = targets(i, j);
        ct_y.push_back(sim.encrypt(ypad, "ct_Y"));
    }

    std::vector<CipherVector> ct_beta;
    for (std::size_t j = 0; j < w0.rows(); ++j) ct_beta.push_back(sim.encrypt(replicate_rows(w0.row(j), width, slots), "ct_beta"));
    auto ct_bbar = sim.encrypt(replicate_rows(sfh.inverse_entries, width, slots), "ct_Bbar");
    auto ct_half = sim.encrypt(std::vector<double>(slots, 0.5), "const 0.5");
    auto ct_one = sim.encrypt(std::vector<double>(slots, 1.0), "const 1");

    return EncodedDataset{std::move(ct_x), std::move(ct_y), std::move(ct_beta), std::move(ct_bbar),
                          std::move(ct_half), std::move(ct_one), layout};
}

int iteration_depth(HeKind kind, const EncodedLayout& layout, std::size_t slot_count) {
    const int mask = (layout.row_width > 1 && layout.row_width < slot_count) ? 1 : 0;
    // x*beta, [mask], r*x, bbar*g
    int depth = 3 + mask;
    // cubic: z^2 and (z^2)(c3 z); then s(1-s) and r*s(1-s)
    if (kind == HeKind::lffr_poly) depth += 4;
    return depth;
}

std::uint64_t predicted_bootstraps(std::size_t iterations, int depth, int initial_levels, std::size_t outputs) {
    if (depth <= 0 || depth > initial_levels) return 0;
    const std::size_t per_cycle = static_cast<std::size_t>(initial_levels / depth);
    const std::size_t cycles = (iterations + per_cycle - 1) / per_cycle;
    return static_cast<std::uint64_t>(cycles == 0 ? 0 : cycles - 1) * outputs;
}

namespace {

// One fixed-Hessian iteration for output j. Returns the gradient ciphertext; beta is replaced.
CipherVector iterate(HeSimulator& sim, const EncodedDataset& enc, HeKind kind, std::size_t j, CipherVector& beta) {
    const std::size_t width = enc.layout.row_width;
    std::optional<CipherVector> acc;
    for (std::size_t b = 0; b < enc.ct_x.size(); ++b) {
        const CipherVector& xb = enc.ct_x[b];
        const CipherVector z = sim.sum_columns(sim.mult(xb, beta, "x*beta"), width, "score");
        CipherVector weight = z;
        if (kind == HeKind::lffr_poly) {
            const CipherVector z2 = sim.mult(z, z, "z^2");
            const CipherVector cubic = sim.mult(z2, sim.cmult(z, kPolySigmoidC3, "c3*z"), "c3*z^3");
            const CipherVector s =
                sim.add(sim.add(cubic, sim.cmult(z, kPolySigmoidC1, "c1*z"), "poly"), enc.ct_half, "poly+c0");
            const CipherVector resid = sim.sub(s, enc.ct_y[j][b], "s-y");
            const CipherVector slope = sim.mult(s, sim.sub(enc.ct_one, s, "1-s"), "s(1-s)");
            weight = sim.mult(sim.add(resid, resid, "2r"), slope, "2r*s(1-s)");
        } else {
            const CipherVector resid = sim.sub(z, enc.ct_y[j][b], "z-y");
            weight = sim.add(resid, resid, "2r");
        }
        CipherVector g = sim.mult(weight, xb, "r*x");
        acc = acc ? sim.add(*acc, g, "block sum") : g;
    }
    const CipherVector grad = sim.sum_rows(*acc, width, "gradient");
    beta = sim.sub(beta, sim.mult(grad, enc.ct_bbar, "bbar*g"), "beta-step");
    return grad;
}

Matrix decrypt_rows(const HeSimulator& sim, const std::vector<CipherVector>& cts, std::size_t cols) {
    Matrix w(cts.size(), cols);
    for (std::size_t j = 0; j < cts.size(); ++j) {
        const auto slots = sim.decrypt(cts[j]);
        for (std::size_t k = 0; k < cols; ++k) w(j, k) = slots[k];
    }
    return w;
}

}  // namespace

EncryptedTrainResult encrypted_train(const Dataset& data, HeKind kind, const TrainConfig& cfg, const SimParams& params) {
    if (cfg.iterations < 1) throw ContractViolation("iterations must be >= 1");
    if (!(cfg.epsilon > 0.0)) throw ContractViolation("epsilon must be > 0");
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ContractViolation("gamma must be in (0, 1)");
    data.validate();
    params.validate();

    // Client: transforms, B̄ and encryption.
    const ModelKind mk = model_kind(kind);
    ModelBundle bundle;
    bundle.kind = mk;
    bundle.scaling = data.scaling;
    if (mk != ModelKind::linear) bundle.norm = normalize_targets(data.y, cfg.epsilon, cfg.gamma).second;
    const Matrix targets = transformed_targets(mk, data.y, bundle.norm);
    const SfhDiagonal sfh = kind == HeKind::lffr_poly ? build_sfh_lffr(data.x, cfg.epsilon)
                                                      : build_sfh_linear(data.x, cfg.epsilon);
    const Matrix w0 = cfg.initial_weights ? *cfg.initial_weights : Matrix(data.outputs(), data.x.cols());

    HeSimulator sim(params);
    EncodedDataset enc = encode_dataset(sim, data.x, targets, sfh, w0);
    const int depth = iteration_depth(kind, enc.layout, params.slot_count);
    if (params.bootstrap_enabled && depth > params.initial_levels)
        throw LevelExhausted("one iteration needs " + std::to_string(depth) + " levels, budget is " +
                             std::to_string(params.initial_levels));

    // Cloud: iterations.
    EncryptedTrainResult out;
    out.levels.initial_levels = params.initial_levels;
    std::vector<CipherVector> beta = enc.ct_beta;
    const std::size_t cols = data.x.cols();
    bundle.weights = w0;

    for (std::size_t it = 1; it <= cfg.iterations; ++it) {
        Matrix grads(data.outputs(), cols);
        int spent = 0;
        for (std::size_t j = 0; j < beta.size(); ++j) {
            if (params.bootstrap_enabled && beta[j].level() < depth) beta[j] = sim.bootstrap(beta[j], "refresh beta");
            const int before = beta[j].level();
            const CipherVector g = iterate(sim, enc, kind, j, beta[j]);
            if (j == 0) spent = before - beta[j].level();
            if (cfg.record_weights) {
                const auto gs = sim.decrypt(g);
                for (std::size_t k = 0; k < cols; ++k) grads(j, k) = gs[k];
            }
        }
        out.levels.levels_per_iteration.push_back(spent);

        // Instrumentation only: the cloud never sees these.
        bundle.weights = decrypt_rows(sim, beta, cols);
        if (!bundle.weights.all_finite()) throw DivergenceError(it, "encrypted weights are not finite");
        const Matrix z = kernels::serial::scores(data.x, bundle.weights);
        Matrix pred_t = z;
        if (kind == HeKind::lffr_poly)
            for (auto& v : pred_t.data()) v = poly_sigmoid(v);
        Matrix pred_o(z.rows(), z.cols());
        for (std::size_t i = 0; i < z.rows(); ++i)
            for (std::size_t j = 0; j < z.cols(); ++j) pred_o(i, j) = score_to_original(bundle, z(i, j), j);
        out.trace.records.push_back({it, mse(pred_o, data.y), mse(pred_t, targets), max_abs(grads)});
        if (cfg.record_weights) {
            out.trace.weights.push_back(bundle.weights);
            out.gradients.push_back(grads);
        }
    }

    out.levels.bootstrap_count = sim.bootstrap_count();
    out.levels.total_mults = sim.mult_count();
    out.levels.total_rotations = sim.rotation_count();
    out.op_log = sim.log();
    out.model = std::move(bundle);
    return out;
}

LedgerReplay replay_ledger(const std::vector<OpRecord>& log, const SimParams& params) {
    LedgerReplay rep;
    std::unordered_map<std::uint64_t, int> level_of;
    auto fail = [&](std::size_t idx, const std::string& why) {
        if (rep.consistent) {
            rep.consistent = false;
            rep.first_violation = "op " + std::to_string(idx) + " (" + std::string(to_string(log[idx].op)) + " at '" +
                                  log[idx].site + "'): " + why;
        }
    };
    auto input_level = [&](std::size_t idx, std::uint64_t id, int recorded) -> int {
        const auto it = level_of.find(id);
        if (it == level_of.end()) {
            fail(idx, "input " + std::to_string(id) + " has no recorded producer");
            return recorded;
        }
        if (it->second != recorded) fail(idx, "input level differs from its producer's output level");
        return it->second;
    };

    for (std::size_t idx = 0; idx < log.size(); ++idx) {
        const OpRecord& r = log[idx];
        int expected = 0;
        switch (r.op) {
            case OpKind::encrypt:
                if (r.input_a || r.input_b) fail(idx, "encrypt takes no ciphertext input");
                expected = params.initial_levels;
                break;
            case OpKind::add:
            case OpKind::sub:
                expected = std::min(input_level(idx, r.input_a, r.level_a), input_level(idx, r.input_b, r.level_b));
                break;
            case OpKind::mult: {
                const int lo = std::min(input_level(idx, r.input_a, r.level_a), input_level(idx, r.input_b, r.level_b));
                if (lo < 1) fail(idx, "multiplication at level 0");
                expected = lo - 1;
                ++rep.level_decrements;
                break;
            }
            case OpKind::cmult: {
                const int la = input_level(idx, r.input_a, r.level_a);
                if (la < 1) fail(idx, "multiplication at level 0");
                expected = la - 1;
                ++rep.level_decrements;
                break;
            }
            case OpKind::rotate: expected = input_level(idx, r.input_a, r.level_a); break;
            case OpKind::bootstrap:
                input_level(idx, r.input_a, r.level_a);
                expected = params.initial_levels;
                ++rep.bootstraps;
                break;
        }
        if (r.output_level != expected) fail(idx, "output level " + std::to_string(r.output_level) + ", expected " +
                                                      std::to_string(expected));
        if (r.output_level < 0) fail(idx, "negative level");
        if (level_of.count(r.output)) fail(idx, "ciphertext id reused");
        level_of[r.output] = r.output_level;
    }
    return rep;
}

}  // namespace sfhreg::hesim
