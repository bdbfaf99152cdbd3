#pragma once

#include <filesystem>

#include <json.hpp>

#include "robust_thresh/estimators.hpp"
#include "robust_thresh/types.hpp"

namespace rthresh {

using Json = nlohmann::json;

// Dataset directory: covariates.csv (d rows x N columns), targets.csv
// (K rows), optional mask.csv (one row of 0/1) and meta.json. Values are
// written as shortest round-trip decimals, so a reload is bit-exact.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

Json to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const Json& j);

Json to_json(const FitConfig& cfg);
FitConfig fit_config_from_json(const Json& j);
Json to_json(const FitReport& rep);
Json to_json(const StepPlan& plan);

// Writes text to path, creating parent directories; throws IoError with the path.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace rthresh
