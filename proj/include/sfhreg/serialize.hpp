#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "sfhreg/data.hpp"
#include "sfhreg/hesim.hpp"
#include "sfhreg/models.hpp"
#include "sfhreg/sfh.hpp"

namespace sfhreg {

using nlohmann::json;

json to_json(const Matrix& m);  // {rows, cols, data} with data row-major
Matrix matrix_from_json(const json& j);

json to_json(const FeatureScaling& s);
FeatureScaling feature_scaling_from_json(const json& j);

json to_json(const NormParams& p);
NormParams norm_params_from_json(const json& j);

json to_json(const SfhDiagonal& d);
SfhDiagonal sfh_diagonal_from_json(const json& j);

// {kind, weights, norm_params (null for linear), feature_scaling, link}
json to_json(const ModelBundle& b);
ModelBundle model_bundle_from_json(const json& j);

json to_json(const hesim::LevelReport& r);

// iter,mse_original,mse_transformed,grad_maxnorm
void write_trace_csv(const std::filesystem::path& path, const TrainTrace& trace);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

}  // namespace sfhreg
