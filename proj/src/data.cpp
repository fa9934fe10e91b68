#include "sfhreg/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

#include "sfhreg/error.hpp"
#include "sfhreg/random.hpp"

namespace sfhreg {

FeatureScaling FeatureScaling::fit(const Matrix& raw) {
    FeatureScaling s;
    s.min.assign(raw.cols(), std::numeric_limits<double>::infinity());
    s.max.assign(raw.cols(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < raw.rows(); ++i)
        for (std::size_t k = 0; k < raw.cols(); ++k) {
            s.min[k] = std::min(s.min[k], raw(i, k));
            s.max[k] = std::max(s.max[k], raw(i, k));
        }
    return s;
}

double FeatureScaling::scale(std::size_t column, double value) const {
    const double lo = min[column];
    const double hi = max[column];
    if (hi == lo) return 0.0;
    return 2.0 * (value - lo) / (hi - lo) - 1.0;
}

void Dataset::validate() const {
    if (x.cols() < 2) throw ContractViolation("dataset needs at least one feature");
    if (x.rows() != y.rows())
        throw ContractViolation("dataset has " + std::to_string(x.rows()) + " feature rows but " +
                                std::to_string(y.rows()) + " target rows");
    require_finite(x, "dataset features");
    require_finite(y, "dataset targets");
    for (std::size_t i = 0; i < x.rows(); ++i)
        if (x(i, 0) != 1.0) throw ContractViolation("bias column must be 1 in row " + std::to_string(i));
}

Matrix design_matrix(const Matrix& raw, const FeatureScaling& scaling) {
    if (raw.cols() != scaling.features())
        throw ContractViolation("data has " + std::to_string(raw.cols()) + " features, scaling expects " +
                                std::to_string(scaling.features()));
    Matrix x(raw.rows(), raw.cols() + 1);
    for (std::size_t i = 0; i < raw.rows(); ++i) {
        x(i, 0) = 1.0;
        for (std::size_t k = 0; k < raw.cols(); ++k) x(i, k + 1) = scaling.scale(k, raw(i, k));
    }
    return x;
}

Dataset make_dataset(const Matrix& raw, const Matrix& targets) {
    return make_dataset(raw, targets, FeatureScaling::fit(raw));
}

Dataset make_dataset(const Matrix& raw, const Matrix& targets, const FeatureScaling& scaling) {
    Dataset ds{design_matrix(raw, scaling), targets, scaling};
    ds.validate();
    return ds;
}

void NormParams::validate() const {
    if (y_min.size() != y_max.size()) throw ContractViolation("NormParams: y_min/y_max length mismatch");
    if (!(epsilon > 0.0)) throw ContractViolation("NormParams: epsilon must be > 0");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ContractViolation("NormParams: gamma must be in (0, 1)");
    for (std::size_t j = 0; j < y_min.size(); ++j)
        if (y_max[j] < y_min[j]) throw ContractViolation("NormParams: y_max < y_min for output " + std::to_string(j));
}

std::pair<Matrix, NormParams> normalize_targets(const Matrix& y, double epsilon, double gamma) {
    require_finite(y, "normalize_targets");
    NormParams p;
    p.epsilon = epsilon;
    p.gamma = gamma;
    p.y_min.assign(y.cols(), std::numeric_limits<double>::infinity());
    p.y_max.assign(y.cols(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j) {
            p.y_min[j] = std::min(p.y_min[j], y(i, j));
            p.y_max[j] = std::max(p.y_max[j], y(i, j));
        }
    Matrix out(y.rows(), y.cols());
    for (std::size_t i = 0; i < y.rows(); ++i)
        for (std::size_t j = 0; j < y.cols(); ++j) out(i, j) = (y(i, j) - p.y_min[j]) / p.span(j);
    return {std::move(out), std::move(p)};
}

double denormalize_prediction(double prob, const NormParams& params, std::size_t output) {
    return params.span(output) * prob + params.y_min[output];
}

// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());

    std::string line;
    std::size_t line_no = 0;
    CsvTable table{{}, Matrix(1, 1)};
    bool have_header = false;
    std::vector<double> values;
    std::size_t rows = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split(line);
        if (!have_header) {
            if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
                fields = split(std::string_view(line).substr(3));
            for (auto f : fields) table.header.emplace_back(f);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size())
            throw ParseError("ragged row: expected " + std::to_string(table.header.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             line_no);
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto f = fields[c];
            double v = 0.0;
            const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size() || !std::isfinite(v))
                throw ParseError("non-numeric field '" + std::string(f) + "'", line_no, c + 1);
            values.push_back(v);
        }
        ++rows;
    }
    if (!have_header) throw ParseError("empty file " + path.string());
    if (rows == 0) throw ParseError("no data rows in " + path.string());
    table.values = Matrix(rows, table.header.size(), std::move(values));
    return table;
}

namespace {

std::pair<Matrix, Matrix> split_targets(const CsvTable& t, std::size_t n_targets) {
    const std::size_t cols = t.values.cols();
    if (n_targets == 0) throw ParseError("need at least one target column");
    if (n_targets >= cols)
        throw ParseError("n_targets = " + std::to_string(n_targets) + " leaves no feature columns (file has " +
                         std::to_string(cols) + " columns)");
    const std::size_t d = cols - n_targets;
    Matrix raw(t.values.rows(), d);
    Matrix y(t.values.rows(), n_targets);
    for (std::size_t i = 0; i < t.values.rows(); ++i) {
        for (std::size_t k = 0; k < d; ++k) raw(i, k) = t.values(i, k);
        for (std::size_t j = 0; j < n_targets; ++j) y(i, j) = t.values(i, d + j);
    }
    return {std::move(raw), std::move(y)};
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, std::size_t n_targets) {
    auto [raw, y] = split_targets(read_csv(path), n_targets);
    return make_dataset(raw, y);
}

Dataset load_csv(const std::filesystem::path& path, std::size_t n_targets, const FeatureScaling& scaling) {
    auto [raw, y] = split_targets(read_csv(path), n_targets);
    if (raw.cols() != scaling.features())
        throw ContractViolation("data file has " + std::to_string(raw.cols()) + " feature columns, model expects " +
                                std::to_string(scaling.features()));
    return make_dataset(raw, y, scaling);
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& values) {
    if (header.size() != values.cols()) throw ContractViolation("write_csv: header/column count mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (std::size_t i = 0; i < values.rows(); ++i) {
        for (std::size_t c = 0; c < values.cols(); ++c) out << (c ? "," : "") << format_double(values(i, c));
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

// ---------------------------------------------------------------------------

SynthData synth(std::size_t n, std::size_t d, std::size_t c, double sigma, std::uint64_t seed) {
    if (n == 0 || d == 0 || c == 0) throw ContractViolation("synth: n, d and c must be >= 1");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ContractViolation("synth: sigma must be >= 0");

    Xoshiro256pp rng(seed);
    Matrix r(c, d);
    for (auto& v : r.data()) v = rng.uniform(-1.0, 1.0);

    Matrix x(n, d + 1);
    Matrix y(n, c);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        for (std::size_t k = 0; k < d; ++k) x(i, k + 1) = rng.uniform(-1.0, 1.0);
        for (std::size_t j = 0; j < c; ++j) {
            double yi = sigma * rng.normal();
            for (std::size_t k = 0; k < d; ++k) yi += r(j, k) * x(i, k + 1);
            y(i, j) = yi;
        }
    }

    FeatureScaling scaling{std::vector<double>(d, -1.0), std::vector<double>(d, 1.0)};
    return {Dataset{std::move(x), std::move(y), std::move(scaling)}, std::move(r)};
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
    const std::size_t d = data.features();
    const std::size_t c = data.outputs();
    std::vector<std::string> header;
    for (std::size_t k = 1; k <= d; ++k) header.push_back("x" + std::to_string(k));
    for (std::size_t j = 1; j <= c; ++j) header.push_back("y" + std::to_string(j));
    Matrix values(data.samples(), d + c);
    for (std::size_t i = 0; i < data.samples(); ++i) {
        for (std::size_t k = 0; k < d; ++k) values(i, k) = data.x(i, k + 1);
        for (std::size_t j = 0; j < c; ++j) values(i, d + j) = data.y(i, j);
    }
    write_csv(path, header, values);
}

}  // namespace sfhreg
