#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sfhreg/linalg.hpp"

namespace sfhreg {

// Per-column min/max of the raw features; maps each column affinely onto [-1, +1].
// A constant column (max == min) maps to 0.
struct FeatureScaling {
    std::vector<double> min;
    std::vector<double> max;

    static FeatureScaling fit(const Matrix& raw_features);
    std::size_t features() const noexcept { return min.size(); }
    double scale(std::size_t column, double value) const;
};

// Training data: x is n x (1+d) with a leading column of ones, y is n x c raw targets.
struct Dataset {
    Matrix x;
    Matrix y;
    FeatureScaling scaling;

    std::size_t samples() const noexcept { return x.rows(); }
    std::size_t features() const noexcept { return x.cols() - 1; }
    std::size_t outputs() const noexcept { return y.cols(); }

    // Checks the bias column, shapes and finiteness; throws ContractViolation.
    void validate() const;
};

// Scales raw_features with `scaling` and prepends the bias column.
Matrix design_matrix(const Matrix& raw_features, const FeatureScaling& scaling);

Dataset make_dataset(const Matrix& raw_features, const Matrix& targets);
Dataset make_dataset(const Matrix& raw_features, const Matrix& targets, const FeatureScaling& scaling);

// Per-output target range, plus the epsilon and gamma used by the target transforms.
struct NormParams {
    std::vector<double> y_min;
    std::vector<double> y_max;
    double epsilon = 1e-8;
    double gamma = 0.5;

    std::size_t outputs() const noexcept { return y_min.size(); }
    double span(std::size_t output) const noexcept { return y_max[output] - y_min[output] + epsilon; }
    void validate() const;
};

// ȳ_ij = (y_ij - min_j) / (max_j - min_j + epsilon), column by column.
std::pair<Matrix, NormParams> normalize_targets(const Matrix& y, double epsilon, double gamma = 0.5);

// Inverse of normalize_targets for one output: (max - min + eps) * prob + min.
double denormalize_prediction(double prob, const NormParams& params, std::size_t output);

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
    std::vector<std::string> header;
    Matrix values;
};

// One header row, comma separated, every field numeric. Throws ParseError.
CsvTable read_csv(const std::filesystem::path& path);

// Last n_targets columns become y; the rest are min-max scaled features.
Dataset load_csv(const std::filesystem::path& path, std::size_t n_targets);
// Same, reusing previously fitted feature scaling (inference on new data).
Dataset load_csv(const std::filesystem::path& path, std::size_t n_targets, const FeatureScaling& scaling);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& values);

// ---------------------------------------------------------------------------
// Synthetic data

struct SynthData {
    Dataset data;
    Matrix true_weights;  // c x d, no intercept
};

// Draw order from one Xoshiro256pp(seed) stream:
//   1. true weights r, row-major c x d, uniform in [-1, 1)
//   2. for each sample: d features uniform in [-1, 1), then c noise draws N(0, sigma^2)
// y_ij = noise_ij + sum_k r_jk x_ik. Features are used as drawn (already in [-1, 1]).
SynthData synth(std::size_t n, std::size_t d, std::size_t c, double sigma, std::uint64_t seed);

// Header x1..xd,y1..yc followed by the raw features and targets.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);

}  // namespace sfhreg
