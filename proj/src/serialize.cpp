#include "sfhreg/serialize.hpp"

#include <fstream>
#include <string>

#include "sfhreg/error.hpp"

namespace sfhreg {

namespace {

// nlohmann throws its own types; fold them into ParseError so callers see one family.
template <class F>
auto guarded(const char* what, F f) -> decltype(f()) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

}  // namespace

json to_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data().begin(), m.data().end())}};
}

Matrix matrix_from_json(const json& j) {
    return guarded("matrix", [&] {
        const auto rows = j.at("rows").get<std::size_t>();
        const auto cols = j.at("cols").get<std::size_t>();
        auto data = j.at("data").get<std::vector<double>>();
        if (rows == 0 || cols == 0 || data.size() != rows * cols)
            throw ParseError("matrix: data length " + std::to_string(data.size()) + " does not match " +
                             std::to_string(rows) + "x" + std::to_string(cols));
        return Matrix(rows, cols, std::move(data));
    });
}

json to_json(const FeatureScaling& s) { return {{"min", s.min}, {"max", s.max}}; }

FeatureScaling feature_scaling_from_json(const json& j) {
    return guarded("feature_scaling", [&] {
        FeatureScaling s{j.at("min").get<std::vector<double>>(), j.at("max").get<std::vector<double>>()};
        if (s.min.size() != s.max.size()) throw ParseError("feature_scaling: min/max length differ");
        return s;
    });
}

json to_json(const NormParams& p) {
    return {{"y_min", p.y_min}, {"y_max", p.y_max}, {"epsilon", p.epsilon}, {"gamma", p.gamma}};
}

NormParams norm_params_from_json(const json& j) {
    return guarded("norm_params", [&] {
        NormParams p{j.at("y_min").get<std::vector<double>>(), j.at("y_max").get<std::vector<double>>(),
                     j.at("epsilon").get<double>(), j.at("gamma").get<double>()};
        p.validate();
        return p;
    });
}

json to_json(const SfhDiagonal& d) {
    return {{"loss_kind", std::string(to_string(d.loss_kind))}, {"epsilon", d.epsilon}, {"entries", d.entries}};
}

SfhDiagonal sfh_diagonal_from_json(const json& j) {
    return guarded("sfh", [&] {
        return SfhDiagonal::from_entries(j.at("entries").get<std::vector<double>>(),
                                         loss_kind_from_string(j.at("loss_kind").get<std::string>()),
                                         j.at("epsilon").get<double>());
    });
}

json to_json(const ModelBundle& b) {
    json j;
    j["kind"] = std::string(to_string(b.kind));
    j["weights"] = to_json(b.weights);
    j["norm_params"] = b.norm ? to_json(*b.norm) : json(nullptr);
    j["feature_scaling"] = to_json(b.scaling);
    j["link"] = b.link == TargetLink::logit ? "logit" : "identity";
    return j;
}

ModelBundle model_bundle_from_json(const json& j) {
    return guarded("model", [&] {
        ModelBundle b;
        b.kind = model_kind_from_string(j.at("kind").get<std::string>());
        b.weights = matrix_from_json(j.at("weights"));
        if (j.contains("norm_params") && !j.at("norm_params").is_null())
            b.norm = norm_params_from_json(j.at("norm_params"));
        b.scaling = feature_scaling_from_json(j.at("feature_scaling"));
        const std::string link = j.value("link", std::string("logit"));
        if (link == "logit") b.link = TargetLink::logit;
        else if (link == "identity") b.link = TargetLink::identity;
        else throw ParseError("model: unknown link '" + link + "'");
        b.validate();
        return b;
    });
}

json to_json(const hesim::LevelReport& r) {
    return {{"levels_per_iteration", r.levels_per_iteration},
            {"bootstrap_count", r.bootstrap_count},
            {"total_mults", r.total_mults},
            {"total_rotations", r.total_rotations},
            {"initial_levels", r.initial_levels}};
}

void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace) {
    Matrix m(std::max<std::size_t>(trace.records.size(), 1), 4);
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const auto& r = trace.records[i];
        m(i, 0) = static_cast<double>(r.iter);
        m(i, 1) = r.mse_original;
        m(i, 2) = r.mse_transformed;
        m(i, 3) = r.grad_maxnorm;
    }
    if (trace.records.empty()) {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << "iter,mse_original,mse_transformed,grad_maxnorm\n";
        return;
    }
    write_csv(path, {"iter", "mse_original", "mse_transformed", "grad_maxnorm"}, m);
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    return guarded(path.string().c_str(), [&] { return json::parse(in); });
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace sfhreg
