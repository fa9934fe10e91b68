#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sfhreg/cli.hpp"
#include "sfhreg/data.hpp"
#include "sfhreg/serialize.hpp"

using namespace sfhreg;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "sfhreg");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "sfhreg_cli_test" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Noiseless 200 x (4 + 2) dataset shared by several cases.
fs::path noiseless() {
    static const fs::path dir = [] {
        const fs::path d = scratch("noiseless");
        REQUIRE(cli({"gen", "--n", "200", "--d", "4", "--c", "2", "--sigma", "0", "--seed", "1", "--out", d.string()}).code == 0);
        return d;
    }();
    return dir / "data.csv";
}

}  // namespace

TEST_CASE("gen writes a deterministic dataset") {
    const auto a = scratch("gen_a");
    const auto b = scratch("gen_b");
    for (const auto& d : {a, b})
        CHECK(cli({"gen", "--n", "200", "--d", "4", "--c", "2", "--sigma", "0.05", "--seed", "1", "--out", d.string()}).code == 0);
    const auto t = read_csv(a / "data.csv");
    CHECK(t.values.rows() == 200);
    CHECK(t.values.cols() == 6);
    CHECK(fs::exists(a / "true_weights.json"));
    CHECK(slurp(a / "data.csv") == slurp(b / "data.csv"));
    CHECK(slurp(a / "true_weights.json") == slurp(b / "true_weights.json"));
}

TEST_CASE("gen validation") {
    CHECK(cli({"gen", "--sigma", "-1", "--seed", "1", "--out", scratch("neg").string()}).code == 2);
    CHECK(cli({"gen", "--n", "5"}).code == 2);  // no seed
    CHECK(cli({"gen", "--n", "abc", "--seed", "1"}).code == 2);
    CHECK(cli({}).code == 2);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("train reaches the noiseless optimum") {
    const auto out = scratch("train_clear");
    const Run r = cli({"train", "--data", noiseless().string(), "--targets", "2", "--kind", "linear", "--iters", "200",
                       "--out", out.string()});
    REQUIRE(r.code == 0);
    const auto trace = read_csv(out / "trace.csv");
    CHECK(trace.values.rows() == 200);
    CHECK(trace.values(199, 1) < 1e-6);
    CHECK(fs::exists(out / "model.json"));
    CHECK_FALSE(fs::exists(out / "level_report.json"));
}

TEST_CASE("hesim mode matches clear mode") {
    const auto clear = scratch("mode_clear");
    const auto enc = scratch("mode_hesim");
    for (const auto& [mode, dir] : {std::pair{"clear", clear}, std::pair{"hesim", enc}})
        REQUIRE(cli({"train", "--data", noiseless().string(), "--targets", "2", "--kind", "improved", "--iters", "20",
                     "--mode", mode, "--noise-std", "0", "--out", dir.string()})
                    .code == 0);
    const auto a = model_bundle_from_json(read_json_file(clear / "model.json"));
    const auto b = model_bundle_from_json(read_json_file(enc / "model.json"));
    CHECK(max_abs_diff(a.weights, b.weights) <= 1e-9);
    const json rep = read_json_file(enc / "level_report.json");
    CHECK(rep["levels_per_iteration"].size() == 20);
    CHECK(rep.contains("bootstrap_count"));
}

TEST_CASE("train usage errors") {
    const std::string data = noiseless().string();
    CHECK(cli({"train", "--data", data, "--targets", "2", "--kind", "ridge"}).code == 2);
    CHECK(cli({"train", "--data", data, "--targets", "2", "--gamma", "1.5"}).code == 2);
    CHECK(cli({"train", "--data", data, "--targets", "2", "--iters", "0"}).code == 2);
    CHECK(cli({"train", "--data", data, "--targets", "2", "--kind", "lffr", "--mode", "hesim"}).code == 2);
    CHECK(cli({"train", "--data", data, "--targets", "2", "--mode", "hesim", "--slots", "100"}).code == 2);
    CHECK(cli({"train", "--targets", "2"}).code == 2);
    // runtime failure: missing file
    CHECK(cli({"train", "--data", "/nonexistent.csv", "--out", scratch("missing").string()}).code == 1);
}

TEST_CASE("eval") {
    const auto out = scratch("eval");
    REQUIRE(cli({"train", "--data", noiseless().string(), "--targets", "2", "--iters", "200", "--out", out.string()}).code == 0);
    const Run r = cli({"eval", "--data", noiseless().string(), "--model", (out / "model.json").string()});
    REQUIRE(r.code == 0);
    const auto pos = r.out.find("mse=");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(r.out.substr(pos + 4)) < 1e-6);
    CHECK(r.out.find("mse[1]=") != std::string::npos);

    std::ofstream(out / "narrow.csv") << "x1,x2,y1,y2\n0.1,0.2,1,2\n";
    const Run bad = cli({"eval", "--data", (out / "narrow.csv").string(), "--model", (out / "model.json").string()});
    CHECK(bad.code == 1);
    CHECK(bad.err.find('2') != std::string::npos);
    CHECK(bad.err.find('4') != std::string::npos);

    std::ofstream(out / "empty.csv") << "x1,x2,x3,x4,y1,y2\n";
    const Run empty = cli({"eval", "--data", (out / "empty.csv").string(), "--model", (out / "model.json").string()});
    CHECK(empty.code == 1);
    CHECK(empty.err.find("no data rows") != std::string::npos);
}

TEST_CASE("compare") {
    const auto a = scratch("compare_a");
    const auto b = scratch("compare_b");
    for (const auto& d : {a, b})
        REQUIRE(cli({"compare", "--data", noiseless().string(), "--targets", "2", "--iters", "200", "--out", d.string()}).code == 0);
    const auto t = read_csv(a / "compare.csv");
    CHECK(t.header == std::vector<std::string>{"iter", "mse_LR", "mse_YnormdLR", "mse_LFFR", "mse_ImprovedLFFR"});
    CHECK(t.values.rows() == 200);
    CHECK(std::abs(t.values(199, 1) - t.values(199, 2)) < 1e-6);
    CHECK(slurp(a / "compare.csv") == slurp(b / "compare.csv"));
}

TEST_CASE("config file with flag precedence") {
    const auto dir = scratch("config");
    std::ofstream(dir / "cfg.json") << R"({"data": ")" << noiseless().string()
                                    << R"(", "targets": 2, "iters": 5, "kind": "ynorm", "noise-std": 0})";
    const auto cfg = (dir / "cfg.json").string();
    REQUIRE(cli({"train", "--config", cfg, "--out", (dir / "a").string()}).code == 0);
    CHECK(read_csv(dir / "a" / "trace.csv").values.rows() == 5);
    CHECK(read_json_file(dir / "a" / "model.json")["kind"] == "ynorm_linear");
    REQUIRE(cli({"train", "--config", cfg, "--iters", "7", "--out", (dir / "b").string()}).code == 0);
    CHECK(read_csv(dir / "b" / "trace.csv").values.rows() == 7);

    std::ofstream(dir / "bad.json") << R"({"itres": 5})";
    CHECK(cli({"train", "--config", (dir / "bad.json").string()}).code == 2);
}

TEST_CASE("the installed binary reports exit codes") {
    const std::string bin = SFHREG_CLI_PATH;
    CHECK(std::system((bin + " --help > /dev/null").c_str()) == 0);
    const int rc = std::system((bin + " train --kind nope --data x.csv 2> /dev/null").c_str());
    CHECK(WEXITSTATUS(rc) == 2);
}
