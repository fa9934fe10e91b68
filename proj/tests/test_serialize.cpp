#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sfhreg/error.hpp"
#include "sfhreg/serialize.hpp"

using namespace sfhreg;
namespace fs = std::filesystem;

TEST_CASE("matrix json") {
    const Matrix m{{1, 2, 3}, {4, 5, 0.1}};
    const json j = to_json(m);
    CHECK(j["rows"] == 2);
    CHECK(j["data"].size() == 6);
    CHECK(matrix_from_json(j) == m);
    json bad = j;
    bad["data"].erase(0);
    CHECK_THROWS_AS(matrix_from_json(bad), ParseError);
    CHECK_THROWS_AS(matrix_from_json(json{{"rows", 1}}), ParseError);
}

TEST_CASE("model bundle round trip is exact") {
    const SynthData s = synth(30, 2, 2, 0.1, 3);
    TrainConfig cfg;
    cfg.iterations = 5;
    for (auto kind : {ModelKind::linear, ModelKind::ynorm_linear, ModelKind::lffr, ModelKind::improved_lffr}) {
        const auto r = train(s.data, kind, cfg);
        const json j = to_json(r.model);
        CHECK(j.contains("norm_params"));
        CHECK(j.contains("feature_scaling"));
        // through text, as the CLI does
        const ModelBundle back = model_bundle_from_json(json::parse(j.dump()));
        CHECK(back.kind == r.model.kind);
        CHECK(back.weights == r.model.weights);
        CHECK(back.scaling.min == r.model.scaling.min);
        CHECK(predict(back, s.data.x) == predict(r.model, s.data.x));
    }
}

TEST_CASE("bundle validation on load") {
    json j = to_json(train(synth(10, 2, 1, 0.1, 4).data, ModelKind::lffr, TrainConfig{}).model);
    j["norm_params"] = nullptr;
    CHECK_THROWS(model_bundle_from_json(j));
    j["kind"] = "ridge";
    CHECK_THROWS(model_bundle_from_json(j));
}

TEST_CASE("sfh diagonal json") {
    const auto d = build_sfh_lffr(Matrix{{1, 0.5}}, 1e-8);
    const auto back = sfh_diagonal_from_json(json::parse(to_json(d).dump()));
    CHECK(back.entries == d.entries);
    CHECK(back.loss_kind == LossKind::lffr);
    CHECK(back.inverse_entries == d.inverse_entries);
}

TEST_CASE("level report json") {
    hesim::LevelReport r;
    r.levels_per_iteration = {4, 4};
    r.bootstrap_count = 1;
    r.total_mults = 9;
    r.total_rotations = 30;
    const json j = to_json(r);
    for (const char* k : {"levels_per_iteration", "bootstrap_count", "total_mults", "total_rotations"})
        CHECK(j.contains(k));
    CHECK(j["levels_per_iteration"][1] == 4);
}

TEST_CASE("trace csv") {
    TrainTrace t;
    t.records = {{1, 0.5, 0.25, 2.0}, {2, 0.4, 0.2, 1.0}};
    const fs::path p = fs::temp_directory_path() / "sfhreg_trace.csv";
    write_trace_csv(p, t);
    std::ifstream in(p);
    std::string header;
    std::getline(in, header);
    CHECK(header == "iter,mse_original,mse_transformed,grad_maxnorm");
    const auto table = read_csv(p);
    CHECK(table.values == Matrix{{1, 0.5, 0.25, 2.0}, {2, 0.4, 0.2, 1.0}});
}
