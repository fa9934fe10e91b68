#include "sfhreg/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>

#include "sfhreg/data.hpp"
#include "sfhreg/error.hpp"
#include "sfhreg/hesim.hpp"
#include "sfhreg/models.hpp"
#include "sfhreg/serialize.hpp"

namespace sfhreg {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string data;
    std::size_t targets = 1;
    std::string kind = "linear";
    std::size_t iters = 100;
    double gamma = 0.5;
    double epsilon = 1e-8;
    std::string mode = "clear";
    std::string sigmoid = "exact";
    std::size_t slots = 32768;
    int levels = 40;
    bool no_bootstrap = false;
    double noise_std = 0.0;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    std::string model;
    // gen
    std::size_t n = 200;
    std::size_t d = 4;
    std::size_t c = 2;
    double sigma = 0.0;
};

// Keys accepted in a --config file; both "noise-std" and "noise_std" spellings work.
void apply_config(const json& j, RunConfig& rc) {
    if (!j.is_object()) throw UsageError("config must be a JSON object");
    for (const auto& [raw_key, v] : j.items()) {
        std::string key = raw_key;
        std::replace(key.begin(), key.end(), '-', '_');
        try {
            if (key == "data") rc.data = v.get<std::string>();
            else if (key == "targets") rc.targets = v.get<std::size_t>();
            else if (key == "kind") rc.kind = v.get<std::string>();
            else if (key == "iters") rc.iters = v.get<std::size_t>();
            else if (key == "gamma") rc.gamma = v.get<double>();
            else if (key == "epsilon") rc.epsilon = v.get<double>();
            else if (key == "mode") rc.mode = v.get<std::string>();
            else if (key == "sigmoid") rc.sigmoid = v.get<std::string>();
            else if (key == "slots") rc.slots = v.get<std::size_t>();
            else if (key == "levels") rc.levels = v.get<int>();
            else if (key == "no_bootstrap") rc.no_bootstrap = v.get<bool>();
            else if (key == "noise_std") rc.noise_std = v.get<double>();
            else if (key == "seed") rc.seed = v.get<std::uint64_t>();
            else if (key == "out") rc.out = v.get<std::string>();
            else if (key == "model") rc.model = v.get<std::string>();
            else if (key == "n") rc.n = v.get<std::size_t>();
            else if (key == "d") rc.d = v.get<std::size_t>();
            else if (key == "c") rc.c = v.get<std::size_t>();
            else if (key == "sigma") rc.sigma = v.get<double>();
            else throw UsageError("unknown config key '" + raw_key + "'");
        } catch (const json::exception& e) {
            throw UsageError("config key '" + raw_key + "': " + e.what());
        }
    }
}

// The config file is read before CLI11 parses, so explicit flags overwrite its values.
std::optional<std::string> find_config_path(int argc, const char* const* argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string_view a = argv[i];
        if (a == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
        if (a.starts_with("--config=")) return std::string(a.substr(9));
    }
    return std::nullopt;
}

TrainConfig train_config(const RunConfig& rc) {
    if (rc.iters < 1) throw UsageError("--iters must be >= 1");
    if (!(rc.gamma > 0.0 && rc.gamma < 1.0)) throw UsageError("--gamma must be in (0, 1)");
    if (!(rc.epsilon > 0.0)) throw UsageError("--epsilon must be > 0");
    if (rc.targets < 1) throw UsageError("--targets must be >= 1");
    TrainConfig cfg;
    cfg.iterations = rc.iters;
    cfg.gamma = rc.gamma;
    cfg.epsilon = rc.epsilon;
    if (rc.sigmoid == "exact") cfg.sigmoid = SigmoidImpl::exact;
    else if (rc.sigmoid == "poly") cfg.sigmoid = SigmoidImpl::poly;
    else throw UsageError("--sigmoid must be exact or poly");
    return cfg;
}

ModelKind parse_kind(const std::string& s) {
    if (s == "linear") return ModelKind::linear;
    if (s == "ynorm") return ModelKind::ynorm_linear;
    if (s == "lffr") return ModelKind::lffr;
    if (s == "improved") return ModelKind::improved_lffr;
    throw UsageError("unknown --kind '" + s + "' (expected linear, ynorm, lffr or improved)");
}

void require_data(const RunConfig& rc) {
    if (rc.data.empty()) throw UsageError("--data is required");
}

fs::path output_dir(const RunConfig& rc) {
    const fs::path dir(rc.out);
    fs::create_directories(dir);
    return dir;
}

int cmd_gen(const RunConfig& rc, std::ostream& out) {
    if (rc.n < 1 || rc.d < 1 || rc.c < 1) throw UsageError("--n, --d and --c must be >= 1");
    if (!(rc.sigma >= 0.0)) throw UsageError("--sigma must be >= 0");
    if (!rc.seed) throw UsageError("gen requires --seed");
    const SynthData s = synth(rc.n, rc.d, rc.c, rc.sigma, *rc.seed);
    const fs::path dir = output_dir(rc);
    write_dataset_csv(dir / "data.csv", s.data);
    write_json_file(dir / "true_weights.json", {{"n", rc.n},
                                                {"d", rc.d},
                                                {"c", rc.c},
                                                {"sigma", rc.sigma},
                                                {"seed", *rc.seed},
                                                {"weights", to_json(s.true_weights)}});
    out << "wrote " << (dir / "data.csv").string() << " (" << rc.n << " rows, " << rc.d << " features, " << rc.c
        << " targets)\n";
    return 0;
}

int cmd_train(const RunConfig& rc, std::ostream& out) {
    require_data(rc);
    const TrainConfig cfg = train_config(rc);
    const ModelKind kind = parse_kind(rc.kind);
    if (rc.mode != "clear" && rc.mode != "hesim") throw UsageError("--mode must be clear or hesim");

    const Dataset data = load_csv(rc.data, rc.targets);
    const fs::path dir = output_dir(rc);
    ModelBundle model;
    TrainTrace trace;

    if (rc.mode == "clear") {
        auto r = train(data, kind, cfg);
        model = std::move(r.model);
        trace = std::move(r.trace);
    } else {
        hesim::HeKind hk = hesim::HeKind::linear;
        switch (kind) {
            case ModelKind::linear: hk = hesim::HeKind::linear; break;
            case ModelKind::ynorm_linear: hk = hesim::HeKind::ynorm_linear; break;
            case ModelKind::improved_lffr: hk = hesim::HeKind::improved_lffr; break;
            case ModelKind::lffr:
                if (cfg.sigmoid != SigmoidImpl::poly)
                    throw UsageError("--kind lffr in hesim mode needs --sigmoid poly");
                hk = hesim::HeKind::lffr_poly;
                break;
        }
        if (rc.noise_std > 0.0 && !rc.seed) throw UsageError("--noise-std > 0 requires --seed");
        hesim::SimParams p;
        p.slot_count = rc.slots;
        p.initial_levels = rc.levels;
        p.bootstrap_enabled = !rc.no_bootstrap;
        p.noise_std = rc.noise_std;
        p.seed = rc.seed.value_or(0);
        try {
            p.validate();
        } catch (const ContractViolation& e) {
            throw UsageError(e.what());
        }
        auto r = hesim::encrypted_train(data, hk, cfg, p);
        write_json_file(dir / "level_report.json", to_json(r.levels));
        model = std::move(r.model);
        trace = std::move(r.trace);
    }

    write_json_file(dir / "model.json", to_json(model));
    write_trace_csv(dir / "trace.csv", trace);
    out << std::setprecision(10) << "kind=" << to_string(model.kind) << " mode=" << rc.mode
        << " iters=" << trace.records.size() << " final_mse=" << trace.records.back().mse_original << '\n';
    return 0;
}

int cmd_eval(const RunConfig& rc, std::ostream& out) {
    require_data(rc);
    if (rc.model.empty()) throw UsageError("--model is required");
    const ModelBundle model = model_bundle_from_json(read_json_file(rc.model));
    const Dataset data = load_csv(rc.data, model.outputs(), model.scaling);
    const Matrix pred = predict(model, data.x);
    const auto per = mse_per_output(pred, data.y);
    out << std::setprecision(10);
    for (std::size_t j = 0; j < per.size(); ++j) out << "mse[" << j << "]=" << per[j] << '\n';
    out << "mse=" << mse(pred, data.y) << '\n';
    return 0;
}

int cmd_compare(const RunConfig& rc, std::ostream& out) {
    require_data(rc);
    const TrainConfig cfg = train_config(rc);
    const Dataset data = load_csv(rc.data, rc.targets);

    constexpr std::array kinds{ModelKind::linear, ModelKind::ynorm_linear, ModelKind::lffr, ModelKind::improved_lffr};
    std::array<std::future<TrainResult>, kinds.size()> runs;
    for (std::size_t a = 0; a < kinds.size(); ++a)
        runs[a] = std::async(std::launch::async, [&, a] { return train(data, kinds[a], cfg); });
    std::array<TrainTrace, kinds.size()> traces;
    for (std::size_t a = 0; a < kinds.size(); ++a) traces[a] = runs[a].get().trace;

    Matrix table(cfg.iterations, 1 + kinds.size());
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        table(it, 0) = static_cast<double>(it + 1);
        for (std::size_t a = 0; a < kinds.size(); ++a) table(it, 1 + a) = traces[a].records[it].mse_original;
    }
    const fs::path dir = output_dir(rc);
    write_csv(dir / "compare.csv", {"iter", "mse_LR", "mse_YnormdLR", "mse_LFFR", "mse_ImprovedLFFR"}, table);
    out << std::setprecision(10) << "final mse: LR=" << table(cfg.iterations - 1, 1)
        << " YnormdLR=" << table(cfg.iterations - 1, 2) << " LFFR=" << table(cfg.iterations - 1, 3)
        << " ImprovedLFFR=" << table(cfg.iterations - 1, 4) << '\n';
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig rc;
    try {
        if (const auto path = find_config_path(argc, argv)) apply_config(read_json_file(*path), rc);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    CLI::App app{"Fixed-Hessian multi-output regression, in the clear or on a simulated HE backend", "sfhreg"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    app.add_option("--config", config_path, "JSON file with default flag values")->check(CLI::ExistingFile);

    auto common = [&](CLI::App* sub) {
        sub->add_option("--data", rc.data, "CSV with a header row; features first, targets last");
        sub->add_option("--targets", rc.targets, "number of target columns at the end of the CSV");
        sub->add_option("--out", rc.out, "output directory");
    };
    auto training = [&](CLI::App* sub) {
        sub->add_option("--iters", rc.iters, "iterations");
        sub->add_option("--gamma", rc.gamma, "compression factor for improved LFFR");
        sub->add_option("--epsilon", rc.epsilon, "SFH and normalization epsilon");
        sub->add_option("--sigmoid", rc.sigmoid, "exact or poly");
        sub->add_option("--seed", rc.seed, "seed for simulator noise");
    };

    auto* gen = app.add_subcommand("gen", "generate a synthetic linear dataset");
    gen->add_option("--n", rc.n, "samples");
    gen->add_option("--d", rc.d, "features");
    gen->add_option("--c", rc.c, "targets");
    gen->add_option("--sigma", rc.sigma, "noise standard deviation");
    gen->add_option("--seed", rc.seed, "generator seed");
    gen->add_option("--out", rc.out, "output directory");

    auto* tr = app.add_subcommand("train", "train one model");
    common(tr);
    training(tr);
    tr->add_option("--kind", rc.kind, "linear, ynorm, lffr or improved");
    tr->add_option("--mode", rc.mode, "clear or hesim");
    tr->add_option("--slots", rc.slots, "simulator slot count");
    tr->add_option("--levels", rc.levels, "simulator level budget");
    tr->add_option("--noise-std", rc.noise_std, "Gaussian slot noise");
    tr->add_flag("--no-bootstrap", rc.no_bootstrap, "fail instead of bootstrapping");

    auto* ev = app.add_subcommand("eval", "evaluate a saved model on a CSV");
    ev->add_option("--data", rc.data, "CSV with the same layout as the training data");
    ev->add_option("--model", rc.model, "model.json written by train");

    auto* cmp = app.add_subcommand("compare", "MSE per iteration of all four algorithms");
    common(cmp);
    training(cmp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*gen) return cmd_gen(rc, out);
        if (*tr) return cmd_train(rc, out);
        if (*ev) return cmd_eval(rc, out);
        return cmd_compare(rc, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace sfhreg
