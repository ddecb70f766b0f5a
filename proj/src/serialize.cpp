#include "oilrf/serialize.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

#include "oilrf/errors.hpp"

namespace oilrf {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

json tree_to_json(const RegressionTree& tree) {
  json t;
  auto& feature = t["feature"] = json::array();
  auto& threshold = t["threshold"] = json::array();
  auto& value = t["value"] = json::array();
  auto& left = t["left"] = json::array();
  auto& right = t["right"] = json::array();
  auto& count = t["count"] = json::array();
  auto& sse = t["sse"] = json::array();
  for (const TreeNode& n : tree.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    value.push_back(n.value);
    left.push_back(n.left);
    right.push_back(n.right);
    count.push_back(n.count);
    sse.push_back(n.sse);
  }
  return t;
}

RegressionTree tree_from_json(const json& t, Eigen::Index n_features) {
  static constexpr const char* kFields[] = {"feature", "threshold", "value", "left",
                                            "right",   "count",     "sse"};
  for (const char* f : kFields) {
    if (!t.contains(f) || !t[f].is_array() || t[f].size() != t["feature"].size()) {
      throw DataError(std::string("model JSON: tree field '") + f +
                      "' is missing or misshapen");
    }
  }
  RegressionTree tree;
  tree.n_features = n_features;
  tree.feature_reduction = Eigen::VectorXd::Zero(n_features);
  const std::size_t n = t["feature"].size();
  tree.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    TreeNode& node = tree.nodes[i];
    node.feature = t["feature"][i].get<std::int32_t>();
    node.threshold = t["threshold"][i].get<double>();
    node.value = t["value"][i].get<double>();
    node.left = t["left"][i].get<std::int32_t>();
    node.right = t["right"][i].get<std::int32_t>();
    node.count = t["count"][i].get<std::int32_t>();
    node.sse = t["sse"][i].get<double>();
    if (node.feature >= static_cast<std::int32_t>(n_features) ||
        (node.feature >= 0 && (node.left < 0 || node.right < 0 ||
                               static_cast<std::size_t>(node.left) >= n ||
                               static_cast<std::size_t>(node.right) >= n))) {
      throw DataError("model JSON: tree node " + std::to_string(i) + " is out of range");
    }
  }
  // Split gains are implied by the stored SSEs, so recover the per-feature
  // attribution instead of storing it redundantly.
  for (const TreeNode& node : tree.nodes) {
    if (node.feature < 0) continue;
    const double gain =
        node.sse - (tree.nodes[static_cast<std::size_t>(node.left)].sse +
                    tree.nodes[static_cast<std::size_t>(node.right)].sse);
    tree.feature_reduction[node.feature] += gain;
  }
  return tree;
}

}  // namespace

json forest_config_to_json(const ForestConfig& cfg) {
  json j;
  j["n_trees"] = cfg.n_trees;
  j["min_split_size"] = cfg.min_split_size;
  j["mtry"] = cfg.mtry;
  j["subsample_fraction"] = cfg.subsample_fraction;
  j["with_replacement"] = cfg.with_replacement;
  j["oob_mode"] = cfg.oob_mode == OobMode::kPerTree ? "per_tree" : "fixed_holdout";
  j["seed"] = cfg.seed;
  return j;
}

ForestConfig forest_config_from_json(const json& j) {
  ForestConfig cfg;
  try {
    if (j.contains("n_trees")) cfg.n_trees = j["n_trees"].get<int>();
    if (j.contains("min_split_size")) cfg.min_split_size = j["min_split_size"].get<int>();
    if (j.contains("mtry")) cfg.mtry = j["mtry"].get<int>();
    if (j.contains("subsample_fraction")) {
      cfg.subsample_fraction = j["subsample_fraction"].get<double>();
    }
    if (j.contains("with_replacement")) {
      cfg.with_replacement = j["with_replacement"].get<bool>();
    }
    if (j.contains("oob_mode")) {
      const auto mode = j["oob_mode"].get<std::string>();
      if (mode == "per_tree") {
        cfg.oob_mode = OobMode::kPerTree;
      } else if (mode == "fixed_holdout") {
        cfg.oob_mode = OobMode::kFixedHoldout;
      } else {
        throw ConfigError("forest config: unknown oob_mode '" + mode + "'");
      }
    }
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("forest config: ") + e.what());
  }
  return cfg;
}

json forest_to_json(const ForestModel& m) {
  json j;
  j["config"] = forest_config_to_json(m.config);
  j["feature_names"] = m.feature_names;
  j["n_rows_trained"] = m.n_rows_trained;
  j["inbag"] = m.inbag;
  auto& trees = j["trees"] = json::array();
  for (const auto& tree : m.trees) trees.push_back(tree_to_json(tree));
  return j;
}

ForestModel forest_from_json(const json& j) {
  for (const char* f : {"config", "feature_names", "n_rows_trained", "inbag", "trees"}) {
    if (!j.contains(f)) throw DataError(std::string("model JSON: missing '") + f + "'");
  }
  ForestModel m;
  try {
    m.config = forest_config_from_json(j["config"]);
    m.feature_names = j["feature_names"].get<std::vector<std::string>>();
    m.n_rows_trained = j["n_rows_trained"].get<Eigen::Index>();
    m.inbag = j["inbag"].get<std::vector<std::vector<std::int32_t>>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("model JSON: ") + e.what());
  }
  if (j["trees"].size() != m.inbag.size()) {
    throw DataError("model JSON: trees and inbag lists differ in length");
  }
  const auto d = static_cast<Eigen::Index>(m.feature_names.size());
  m.trees.reserve(j["trees"].size());
  for (const auto& t : j["trees"]) m.trees.push_back(tree_from_json(t, d));
  return m;
}

void save_forest(const std::filesystem::path& path, const ForestModel& m) {
  // Compact dump: a benchmark model runs to megabytes, and pretty-printing
  // the inbag lists would put every index on its own line.
  write_text_file(path, forest_to_json(m).dump() + "\n");
}

ForestModel load_forest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read model file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("model file " + path.string() + ": " + e.what());
  }
  return forest_from_json(j);
}

json linear_report(const LinearModel& m) {
  json j;
  for (std::size_t i = 0; i < m.feature_names.size(); ++i) {
    j[m.feature_names[i]] = m.coefficients[static_cast<Eigen::Index>(i)];
  }
  j["intercept"] = m.intercept;
  j["rmse"] = m.rmse_in_sample;
  return j;
}

json eval_table_to_json(const EvalTable& table) {
  json j;
  j["basis"] = table.basis == RatioBasis::kInSample ? "in_sample" : "out_of_sample";
  auto& rows = j["rows"] = json::array();
  for (const EvalRow& r : table.rows) {
    json row;
    row["model"] = r.model;
    row["config"] = r.config;
    row["rmse_in_sample"] = r.rmse_in_sample;
    row["rmse_out"] = r.rmse_out ? json(*r.rmse_out) : json(nullptr);
    row["ratio_ols"] = r.ratio_ols ? json(*r.ratio_ols) : json(nullptr);
    row["ratio_ar1"] = r.ratio_ar1 ? json(*r.ratio_ar1) : json(nullptr);
    rows.push_back(std::move(row));
  }
  return j;
}

TransformSpec transform_spec_from_json(const ordered_json& j) {
  if (!j.is_object()) throw ConfigError("transform spec must be a JSON object");
  TransformSpec spec;
  for (const auto& [key, value] : j.items()) {
    if (key == "window") {
      if (!value.is_number_integer()) throw ConfigError("transform spec: window must be an integer");
      spec.window = value.get<int>();
      continue;
    }
    if (key == "momentum") {
      if (!value.is_boolean()) throw ConfigError("transform spec: momentum must be a boolean");
      spec.momentum = value.get<bool>();
      continue;
    }
    if (!value.is_object() || !value.contains("transform")) {
      throw ConfigError("transform spec: variable '" + key +
                        "' needs an object with a \"transform\" key");
    }
    VariableSpec var;
    var.name = key;
    const auto t = value["transform"].get<std::string>();
    if (t == "log") {
      var.transform = Transform::kLogChange;
    } else if (t == "level") {
      var.transform = Transform::kLevelChange;
    } else if (t == "zero_safe_log") {
      var.transform = Transform::kZeroSafeLog;
    } else {
      throw ConfigError("transform spec: variable '" + key + "' has unknown transform '" + t +
                        "'");
    }
    if (value.contains("role")) {
      const auto role = value["role"].get<std::string>();
      if (role == "feature") {
        var.role = Role::kFeature;
      } else if (role == "target") {
        var.role = Role::kTarget;
      } else {
        throw ConfigError("transform spec: variable '" + key + "' has unknown role '" + role +
                          "'");
      }
    }
    spec.variables.push_back(std::move(var));
  }
  spec.validate();
  return spec;
}

TransformSpec read_transform_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read transform spec " + path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("transform spec " + path.string() + ": " + e.what());
  }
  return transform_spec_from_json(j);
}

ordered_json transform_spec_to_json(const TransformSpec& spec) {
  ordered_json j;
  for (const VariableSpec& var : spec.variables) {
    ordered_json v;
    switch (var.transform) {
      case Transform::kLogChange: v["transform"] = "log"; break;
      case Transform::kLevelChange: v["transform"] = "level"; break;
      case Transform::kZeroSafeLog: v["transform"] = "zero_safe_log"; break;
    }
    v["role"] = var.role == Role::kTarget ? "target" : "feature";
    j[var.name] = std::move(v);
  }
  j["window"] = spec.window;
  j["momentum"] = spec.momentum;
  return j;
}

DgpConfig dgp_config_from_json(const json& j) {
  DgpConfig cfg = DgpConfig::benchmark();
  try {
    if (j.contains("n_rows")) cfg.n_rows = j["n_rows"].get<Eigen::Index>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("linear")) {
      const auto v = j["linear"].get<std::vector<double>>();
      cfg.linear = Eigen::Map<const Eigen::VectorXd>(v.data(),
                                                     static_cast<Eigen::Index>(v.size()));
      // A new width invalidates the preset autocorrelations unless overridden.
      if (!j.contains("autocorr")) cfg.autocorr = Eigen::VectorXd::Constant(cfg.linear.size(), 0.9);
      if (!j.contains("feature_names")) cfg.feature_names.clear();
    }
    if (j.contains("autocorr")) {
      if (j["autocorr"].is_number()) {
        cfg.autocorr = Eigen::VectorXd::Constant(cfg.linear.size(), j["autocorr"].get<double>());
      } else {
        const auto v = j["autocorr"].get<std::vector<double>>();
        cfg.autocorr = Eigen::Map<const Eigen::VectorXd>(v.data(),
                                                         static_cast<Eigen::Index>(v.size()));
      }
    }
    if (j.contains("feature_names")) {
      cfg.feature_names = j["feature_names"].get<std::vector<std::string>>();
    }
    if (j.contains("hinge_index")) cfg.hinge_index = j["hinge_index"].get<Eigen::Index>();
    if (j.contains("hinge_coef")) cfg.hinge_coef = j["hinge_coef"].get<double>();
    if (j.contains("interaction_a")) cfg.interaction_a = j["interaction_a"].get<Eigen::Index>();
    if (j.contains("interaction_b")) cfg.interaction_b = j["interaction_b"].get<Eigen::Index>();
    if (j.contains("interaction_coef")) {
      cfg.interaction_coef = j["interaction_coef"].get<double>();
    }
    if (j.contains("noise_std")) cfg.noise_std = j["noise_std"].get<double>();
    if (j.contains("price_noise_std")) {
      cfg.price_noise_std = j["price_noise_std"].get<double>();
    }
    if (j.contains("price_start")) cfg.price_start = j["price_start"].get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json dgp_config_to_json(const DgpConfig& cfg) {
  json j;
  j["n_rows"] = cfg.n_rows;
  j["seed"] = cfg.seed;
  j["linear"] = std::vector<double>(cfg.linear.begin(), cfg.linear.end());
  j["autocorr"] = std::vector<double>(cfg.autocorr.begin(), cfg.autocorr.end());
  if (!cfg.feature_names.empty()) j["feature_names"] = cfg.feature_names;
  j["hinge_index"] = cfg.hinge_index;
  j["hinge_coef"] = cfg.hinge_coef;
  j["interaction_a"] = cfg.interaction_a;
  j["interaction_b"] = cfg.interaction_b;
  j["interaction_coef"] = cfg.interaction_coef;
  j["noise_std"] = cfg.noise_std;
  j["price_noise_std"] = cfg.price_noise_std;
  j["price_start"] = cfg.price_start;
  return j;
}

std::string file_hash_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot hash missing file " + path.string());
  std::uint64_t h = 14695981039346656037ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return std::string(hex, 16);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace oilrf
