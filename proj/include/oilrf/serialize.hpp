#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "oilrf/analysis.hpp"
#include "oilrf/dataset.hpp"
#include "oilrf/forest.hpp"
#include "oilrf/linear.hpp"
#include "oilrf/synthgen.hpp"

namespace oilrf {

// All JSON emitted here keeps keys sorted (nlohmann's default object order)
// and renders doubles shortest-round-trip, so reruns are byte-identical and
// models reload bit-exactly.

nlohmann::json forest_to_json(const ForestModel& m);
ForestModel forest_from_json(const nlohmann::json& j);
void save_forest(const std::filesystem::path& path, const ForestModel& m);
ForestModel load_forest(const std::filesystem::path& path);

nlohmann::json forest_config_to_json(const ForestConfig& cfg);
ForestConfig forest_config_from_json(const nlohmann::json& j);

// Flat coefficient report: {<feature>: coefficient, "intercept": ..., "rmse": ...}.
nlohmann::json linear_report(const LinearModel& m);

nlohmann::json eval_table_to_json(const EvalTable& table);

// Transform spec file: variable name -> {"transform": "log"|"level"|
// "zero_safe_log", "role": "feature"|"target"}, plus top-level "window" and
// "momentum". Variable listing order defines feature order, so parsing uses
// order-preserving JSON.
TransformSpec transform_spec_from_json(const nlohmann::ordered_json& j);
TransformSpec read_transform_spec(const std::filesystem::path& path);
nlohmann::ordered_json transform_spec_to_json(const TransformSpec& spec);

// Synth config JSON starts from the benchmark preset and overrides the keys
// present; "autocorr" accepts a scalar broadcast to every feature.
DgpConfig dgp_config_from_json(const nlohmann::json& j);
nlohmann::json dgp_config_to_json(const DgpConfig& cfg);

// FNV-1a 64-bit content hash as 16 hex digits, for run manifests.
std::string file_hash_hex(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace oilrf
