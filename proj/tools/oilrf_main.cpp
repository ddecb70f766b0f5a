// Command-line experiment runner: every subcommand reads one JSON config,
// writes its artifacts into --out, and finishes with a manifest.json that can
// itself be replayed as a config for a byte-identical rerun.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oilrf/analysis.hpp"
#include "oilrf/dataset.hpp"
#include "oilrf/errors.hpp"
#include "oilrf/forest.hpp"
#include "oilrf/linear.hpp"
#include "oilrf/serialize.hpp"
#include "oilrf/series.hpp"
#include "oilrf/synthgen.hpp"
#include "oilrf/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace oilrf;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

// Collects everything written so a failed run can remove its partial outputs,
// and hashes the survivors for the manifest.
struct Bundle {
  fs::path dir;
  std::vector<fs::path> written;
  json input_hashes = json::object();

  fs::path path(const std::string& name) const { return dir / name; }

  void note(const fs::path& p) { written.push_back(p); }

  void note_input(const fs::path& p) { input_hashes[p.string()] = file_hash_hex(p); }

  void discard() {
    for (const auto& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    written.clear();
  }
};

// Re-throws module errors with the failing stage named, keeping the type (and
// with it the exit code) intact.
template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string(name) + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(std::string(name) + ": " + e.what());
  }
}

json parse_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

// A manifest is accepted wherever a config is: the recorded config replays,
// provided it was recorded for the same subcommand.
json load_config(const std::string& command, const CommonOpts& opts) {
  json j = parse_json_file(opts.config_path);
  if (j.is_object() && j.contains("command") && j.contains("config")) {
    const auto recorded = j["command"].get<std::string>();
    if (recorded != command) {
      throw ConfigError("manifest " + opts.config_path + " was recorded for '" + recorded +
                        "', not '" + command + "'");
    }
    j = j["config"];
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  return j;
}

void write_manifest(Bundle& bundle, const std::string& command, const json& config,
                    std::uint64_t seed, int threads) {
  json outputs = json::object();
  for (const auto& p : bundle.written) outputs[p.filename().string()] = file_hash_hex(p);
  json manifest;
  manifest["command"] = command;
  manifest["config"] = config;
  manifest["seed"] = seed;
  manifest["threads"] = threads;
  manifest["inputs"] = bundle.input_hashes;
  manifest["outputs"] = outputs;
  write_text_file(bundle.path("manifest.json"), manifest.dump(2) + "\n");
}

ForestConfig forest_config_from(const json& config, const CommonOpts& opts) {
  ForestConfig cfg;
  if (config.contains("forest")) cfg = forest_config_from_json(config["forest"]);
  if (opts.seed) cfg.seed = *opts.seed;
  return cfg;
}

Dataset load_dataset(const json& config, Bundle& bundle) {
  if (!config.contains("dataset")) throw ConfigError("config needs a \"dataset\" path");
  const fs::path path = config["dataset"].get<std::string>();
  return stage("load dataset", [&] {
    Dataset d = read_dataset_csv(path);
    bundle.note_input(path);
    return d;
  });
}

ForestModel load_model(const json& config, Bundle& bundle) {
  if (!config.contains("model")) throw ConfigError("config needs a \"model\" path");
  const fs::path path = config["model"].get<std::string>();
  return stage("load model", [&] {
    ForestModel m = load_forest(path);
    bundle.note_input(path);
    return m;
  });
}

std::string safe_name(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    if (!ok) c = '_';
  }
  return out;
}

Date parse_config_date(const json& v, const char* key) {
  if (!v.is_string()) throw ConfigError(std::string(key) + " must be a YYYY-MM-DD string");
  return Date::parse(v.get<std::string>());
}

std::vector<int> checkpoints_from(const json& config, int n_trees) {
  std::vector<int> cps;
  if (config.contains("curve_checkpoints")) {
    cps = config["curve_checkpoints"].get<std::vector<int>>();
  } else {
    for (const int c : {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000}) {
      if (c <= n_trees) cps.push_back(c);
    }
    if (cps.empty() || cps.back() != n_trees) cps.push_back(n_trees);
  }
  return cps;
}

void write_mse_curve_csv(const fs::path& path,
                         const std::vector<std::pair<int, double>>& curve) {
  std::string text = "n_trees,oob_mse\n";
  for (const auto& [n, mse] : curve) {
    text += std::to_string(n) + "," + format_double(mse) + "\n";
  }
  write_text_file(path, text);
}

// --- subcommand bodies -----------------------------------------------------

void cmd_synth(const json& config, const CommonOpts& opts, Bundle& bundle) {
  DgpConfig dgp = stage("synth config", [&] { return dgp_config_from_json(config); });
  if (opts.seed) dgp.seed = *opts.seed;
  const SynthData synth = stage("generate", [&] { return generate(dgp); });

  stage("write outputs", [&] {
    write_dataset_csv(bundle.path("dataset.csv"), synth.data);
    bundle.note(bundle.path("dataset.csv"));
    RawSeries price{kSynthPriceColumn, synth.panel.calendar,
                    synth.panel.col(kSynthPriceColumn)};
    write_series_csv(bundle.path("price.csv"), price);
    bundle.note(bundle.path("price.csv"));
    write_summary_csv(bundle.path("summary.csv"), summarize(synth.data));
    bundle.note(bundle.path("summary.csv"));
  });
  write_manifest(bundle, "synth", dgp_config_to_json(dgp), dgp.seed, opts.threads);
}

struct IngestResult {
  DailyPanel panel;
  Dataset data;
};

IngestResult run_ingest(const json& config, Bundle& bundle) {
  if (!config.contains("series") || !config["series"].is_object()) {
    throw ConfigError("ingest config needs a \"series\" object of name -> csv path");
  }
  if (!config.contains("calendar_source")) {
    throw ConfigError("ingest config needs a \"calendar_source\" series name");
  }

  std::vector<std::string> covid;
  if (config.contains("covid_ma7_log1p")) {
    covid = config["covid_ma7_log1p"].get<std::vector<std::string>>();
  }

  std::vector<RawSeries> series = stage("load series", [&] {
    std::vector<RawSeries> list;
    for (const auto& [name, path_v] : config["series"].items()) {
      const fs::path path = path_v.get<std::string>();
      RawSeries s = load_series(path, name);
      bundle.note_input(path);
      if (std::find(covid.begin(), covid.end(), name) != covid.end()) {
        s.values = zero_safe_covid_transform(s.values);
      }
      list.push_back(std::move(s));
    }
    return list;
  });

  const int max_gap = config.value("max_gap_days", 5);
  IngestResult result;
  result.panel = stage("align", [&] {
    return align_and_interpolate(series, config["calendar_source"].get<std::string>(),
                                 max_gap);
  });

  TransformSpec spec = stage("transform spec", [&] {
    if (!config.contains("transforms")) {
      throw ConfigError("ingest config needs \"transforms\" (path or inline object)");
    }
    if (config["transforms"].is_string()) {
      const fs::path path = config["transforms"].get<std::string>();
      TransformSpec s = read_transform_spec(path);
      bundle.note_input(path);
      return s;
    }
    // Inline specs re-parse through the order-preserving representation so
    // feature order follows the config's listing order.
    return transform_spec_from_json(config["transforms"].get<nlohmann::ordered_json>());
  });

  result.data = stage("build features", [&] { return build_features(result.panel, spec); });
  if (config.contains("from") || config.contains("to")) {
    result.data = stage("filter dates", [&] {
      const Date from = config.contains("from")
                            ? parse_config_date(config["from"], "from")
                            : result.data.dates.front();
      const Date to = config.contains("to") ? parse_config_date(config["to"], "to")
                                            : result.data.dates.back();
      return filter_dates(result.data, from, to);
    });
  }
  return result;
}

void cmd_ingest(const json& config, const CommonOpts& opts, Bundle& bundle) {
  const IngestResult result = run_ingest(config, bundle);
  stage("write outputs", [&] {
    write_dataset_csv(bundle.path("dataset.csv"), result.data);
    bundle.note(bundle.path("dataset.csv"));
    write_summary_csv(bundle.path("summary.csv"), summarize(result.data));
    bundle.note(bundle.path("summary.csv"));
  });
  write_manifest(bundle, "ingest", config, opts.seed.value_or(0), opts.threads);
}

void cmd_fit(const json& config, const CommonOpts& opts, Bundle& bundle) {
  const Dataset d = load_dataset(config, bundle);
  const ForestConfig cfg = forest_config_from(config, opts);
  const ForestModel m = stage("fit", [&] { return fit_forest(d, cfg, opts.threads); });
  stage("write outputs", [&] {
    save_forest(bundle.path("model.json"), m);
    bundle.note(bundle.path("model.json"));
  });
  json recorded = config;
  recorded["forest"] = forest_config_to_json(m.config);
  write_manifest(bundle, "fit", recorded, cfg.seed, opts.threads);
}

std::vector<EvalRow> eval_rows(const ForestModel& forest, const Dataset& d) {
  std::vector<EvalRow> rows;
  const EvalMetrics metrics = evaluate(forest, d);
  EvalRow fr;
  fr.model = "forest";
  fr.config = forest.config.summary();
  fr.rmse_in_sample = metrics.rmse_in_sample;
  fr.rmse_out = metrics.rmse_oob;
  rows.push_back(std::move(fr));

  const LinearModel ols = fit_ols(d);
  EvalRow olsr;
  olsr.model = "ols";
  olsr.config = std::to_string(ols.feature_names.size()) + " features";
  olsr.rmse_in_sample = ols.rmse_in_sample;
  rows.push_back(std::move(olsr));

  if (d.feature_index(kMomentumFeature) >= 0) {
    const LinearModel ar1 = fit_ar1(d);
    EvalRow ar;
    ar.model = "ar1";
    ar.config = "1 feature";
    ar.rmse_in_sample = ar1.rmse_in_sample;
    rows.push_back(std::move(ar));
  }
  return rows;
}

void write_eval_outputs(Bundle& bundle, const std::string& base, const EvalTable& table) {
  write_text_file(bundle.path(base + ".txt"), render_eval_text(table));
  bundle.note(bundle.path(base + ".txt"));
  write_text_file(bundle.path(base + ".json"), eval_table_to_json(table).dump(2) + "\n");
  bundle.note(bundle.path(base + ".json"));
}

void cmd_eval(const json& config, const CommonOpts& opts, Bundle& bundle) {
  const Dataset d = load_dataset(config, bundle);
  const ForestModel m = load_model(config, bundle);
  const EvalTable table =
      stage("evaluate", [&] { return compare(eval_rows(m, d), RatioBasis::kInSample); });
  stage("write outputs", [&] {
    write_eval_outputs(bundle, "eval", table);
    if (config.contains("curve_checkpoints")) {
      const auto curve = mse_curve_from_model(m, d, checkpoints_from(config, m.config.n_trees));
      write_mse_curve_csv(bundle.path("mse_curve.csv"), curve);
      bundle.note(bundle.path("mse_curve.csv"));
    }
  });
  write_manifest(bundle, "eval", config, opts.seed.value_or(m.config.seed), opts.threads);
}

void cmd_importance(const json& config, const CommonOpts& opts, Bundle& bundle) {
  if (config.contains("ranges")) {
    const Dataset d = load_dataset(config, bundle);
    const ForestConfig cfg = forest_config_from(config, opts);
    std::vector<DateRange> ranges;
    for (const auto& r : config["ranges"]) {
      ranges.push_back(DateRange{r["name"].get<std::string>(),
                                 parse_config_date(r["from"], "range from"),
                                 parse_config_date(r["to"], "range to")});
    }
    const SubsampleStudy study =
        stage("subsample study", [&] { return subsample_study(d, ranges, cfg, opts.threads); });
    for (const auto& warning : study.warnings) std::cerr << "warning: " << warning << '\n';
    stage("write outputs", [&] {
      for (const auto& [name, report] : study.reports) {
        const fs::path p = bundle.path("importance_" + safe_name(name) + ".csv");
        write_importance_csv(p, report);
        bundle.note(p);
      }
    });
    write_manifest(bundle, "importance", config, cfg.seed, opts.threads);
    return;
  }

  const ForestModel m = load_model(config, bundle);
  const ImportanceReport report = stage("importance", [&] { return importance(m); });
  if (report.degenerate) {
    std::cerr << "warning: no split anywhere in the forest; raw scores are all zero\n";
  }
  stage("write outputs", [&] {
    write_importance_csv(bundle.path("importance.csv"), report);
    bundle.note(bundle.path("importance.csv"));
  });
  write_manifest(bundle, "importance", config, opts.seed.value_or(m.config.seed),
                 opts.threads);
}

void cmd_pdp(const json& config, const CommonOpts& opts, Bundle& bundle) {
  const Dataset d = load_dataset(config, bundle);
  const ForestModel m = load_model(config, bundle);
  const int n_points = config.value("grid_points", 41);

  std::vector<std::string> features;
  if (config.contains("features")) {
    features = config["features"].get<std::vector<std::string>>();
  } else {
    features = m.feature_names;
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  if (config.contains("pairs")) {
    for (const auto& p : config["pairs"]) {
      pairs.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
    }
  }

  stage("partial effects", [&] {
    for (const auto& f : features) {
      const PartialEffectGrid g = partial_effect_1d(m, d, f, make_grid(d, f, n_points));
      const fs::path p = bundle.path("pd_" + safe_name(f) + ".csv");
      write_partial_effect_csv(p, g);
      bundle.note(p);
    }
    for (const auto& [f1, f2] : pairs) {
      const PartialEffectGrid g = partial_effect_2d(m, d, f1, f2, make_grid(d, f1, n_points),
                                                    make_grid(d, f2, n_points));
      const fs::path p = bundle.path("pd2_" + safe_name(f1) + "_" + safe_name(f2) + ".csv");
      write_partial_effect_csv(p, g);
      bundle.note(p);
    }
  });
  write_manifest(bundle, "pdp", config, opts.seed.value_or(m.config.seed), opts.threads);
}

std::vector<int> horizons_from(const json& config) {
  std::vector<int> horizons{22, 44, 66};
  if (config.contains("horizons")) horizons = config["horizons"].get<std::vector<int>>();
  for (const int h : horizons) {
    if (h < 1) throw ConfigError("forecast horizon must be >= 1, got " + std::to_string(h));
  }
  return horizons;
}

// Shared by `forecast` and `run`: one refit + comparison per horizon.
std::vector<std::pair<int, EvalTable>> forecast_tables(const Dataset& d,
                                                       const DailyPanel& panel,
                                                       const std::string& price_column,
                                                       const std::vector<int>& horizons,
                                                       const ForestConfig& cfg, int threads) {
  std::vector<std::pair<int, EvalTable>> tables;
  for (const int h : horizons) {
    ForecastSpec spec;
    spec.horizon = h;
    const Dataset shifted = make_forecast_dataset(d, spec, panel, price_column);
    const ForestModel m = fit_forest(shifted, cfg, threads);
    tables.emplace_back(h, compare(eval_rows(m, shifted), RatioBasis::kOutOfSample));
  }
  return tables;
}

void write_forecast_outputs(Bundle& bundle,
                            const std::vector<std::pair<int, EvalTable>>& tables) {
  write_text_file(bundle.path("forecast.txt"), render_forecast_text(tables));
  bundle.note(bundle.path("forecast.txt"));
  json j;
  auto& arr = j["horizons"] = json::array();
  for (const auto& [h, table] : tables) {
    json entry;
    entry["horizon"] = h;
    entry["table"] = eval_table_to_json(table);
    arr.push_back(std::move(entry));
  }
  write_text_file(bundle.path("forecast.json"), j.dump(2) + "\n");
  bundle.note(bundle.path("forecast.json"));
}

void cmd_forecast(const json& config, const CommonOpts& opts, Bundle& bundle) {
  const std::vector<int> horizons = horizons_from(config);  // validate before compute
  const Dataset d = load_dataset(config, bundle);
  if (!config.contains("price_series")) {
    throw ConfigError("forecast config needs a \"price_series\" csv path");
  }
  const fs::path price_path = config["price_series"].get<std::string>();
  const RawSeries price = stage("load price series", [&] {
    RawSeries s = load_series(price_path, "price");
    bundle.note_input(price_path);
    return s;
  });
  DailyPanel panel;
  panel.calendar = price.dates;
  panel.names = {price.name};
  panel.columns = {price.values};

  const ForestConfig cfg = forest_config_from(config, opts);
  const auto tables = stage("forecast", [&] {
    return forecast_tables(d, panel, price.name, horizons, cfg, opts.threads);
  });
  stage("write outputs", [&] { write_forecast_outputs(bundle, tables); });
  write_manifest(bundle, "forecast", config, cfg.seed, opts.threads);
}

void cmd_sweep(const json& config, const CommonOpts& opts, Bundle& bundle) {
  const Dataset d = load_dataset(config, bundle);
  std::vector<int> p_values{4, 5, 6, 8, 10, 20, 30, 40};
  if (config.contains("p_values")) p_values = config["p_values"].get<std::vector<int>>();
  ForestConfig base = forest_config_from(config, opts);

  const EvalTable table = stage("sweep", [&] {
    std::vector<EvalRow> rows;
    for (const int p : p_values) {
      ForestConfig cfg = base;
      cfg.min_split_size = p;
      const ForestModel m = fit_forest(d, cfg, opts.threads);
      const EvalMetrics metrics = evaluate(m, d);
      EvalRow row;
      row.model = "forest";
      row.config = cfg.summary();
      row.rmse_in_sample = metrics.rmse_in_sample;
      row.rmse_out = metrics.rmse_oob;
      rows.push_back(std::move(row));
    }
    const LinearModel ols = fit_ols(d);
    EvalRow olsr;
    olsr.model = "ols";
    olsr.config = std::to_string(ols.feature_names.size()) + " features";
    olsr.rmse_in_sample = ols.rmse_in_sample;
    rows.push_back(std::move(olsr));
    if (d.feature_index(kMomentumFeature) >= 0) {
      const LinearModel ar1 = fit_ar1(d);
      EvalRow ar;
      ar.model = "ar1";
      ar.config = "1 feature";
      ar.rmse_in_sample = ar1.rmse_in_sample;
      rows.push_back(std::move(ar));
    }
    return compare(std::move(rows), RatioBasis::kInSample);
  });

  stage("write outputs", [&] {
    write_text_file(bundle.path("sweep.txt"), render_eval_text(table));
    bundle.note(bundle.path("sweep.txt"));
    write_text_file(bundle.path("sweep.json"), eval_table_to_json(table).dump(2) + "\n");
    bundle.note(bundle.path("sweep.json"));
  });
  write_manifest(bundle, "sweep", config, base.seed, opts.threads);
}

void cmd_run(const json& config, const CommonOpts& opts, Bundle& bundle) {
  const bool has_synth = config.contains("synth");
  const bool has_ingest = config.contains("ingest");
  if (has_synth == has_ingest) {
    throw ConfigError("run config needs exactly one data source: \"synth\" or \"ingest\"");
  }
  const std::vector<int> horizons =
      config.contains("horizons") && config["horizons"].is_array() && config["horizons"].empty()
          ? std::vector<int>{}
          : horizons_from(config);

  // Data source.
  Dataset d;
  DailyPanel panel;
  std::string price_column;
  json resolved = config;
  if (has_synth) {
    DgpConfig dgp = stage("synth config", [&] { return dgp_config_from_json(config["synth"]); });
    if (opts.seed) dgp.seed = *opts.seed;
    SynthData synth = stage("generate", [&] { return generate(dgp); });
    d = std::move(synth.data);
    panel = std::move(synth.panel);
    price_column = kSynthPriceColumn;
    resolved["synth"] = dgp_config_to_json(dgp);
  } else {
    const IngestResult result = run_ingest(config["ingest"], bundle);
    d = result.data;
    panel = result.panel;
    price_column = config.value("price_column", std::string());
    if (price_column.empty()) {
      // Default to the raw series the target transform is built from.
      const json& transforms = config["ingest"].contains("transforms")
                                   ? config["ingest"]["transforms"]
                                   : json();
      if (transforms.is_object()) {
        for (const auto& [name, v] : transforms.items()) {
          if (v.is_object() && v.value("role", "") == std::string("target")) {
            price_column = name;
          }
        }
      }
    }
  }

  const ForestConfig cfg = forest_config_from(config, opts);
  const ForestModel model = stage("fit", [&] { return fit_forest(d, cfg, opts.threads); });
  resolved["forest"] = forest_config_to_json(model.config);

  stage("write outputs", [&] {
    write_dataset_csv(bundle.path("dataset.csv"), d);
    bundle.note(bundle.path("dataset.csv"));
    write_summary_csv(bundle.path("summary.csv"), summarize(d));
    bundle.note(bundle.path("summary.csv"));
    save_forest(bundle.path("model.json"), model);
    bundle.note(bundle.path("model.json"));
  });

  const EvalTable table =
      stage("evaluate", [&] { return compare(eval_rows(model, d), RatioBasis::kInSample); });
  stage("write eval", [&] {
    write_eval_outputs(bundle, "eval", table);
    const LinearModel ols = fit_ols(d);
    write_text_file(bundle.path("ols.json"), linear_report(ols).dump(2) + "\n");
    bundle.note(bundle.path("ols.json"));
    if (d.feature_index(kMomentumFeature) >= 0) {
      const LinearModel ar1 = fit_ar1(d);
      write_text_file(bundle.path("ar1.json"), linear_report(ar1).dump(2) + "\n");
      bundle.note(bundle.path("ar1.json"));
    }
  });

  stage("importance", [&] {
    write_importance_csv(bundle.path("importance.csv"), importance(model));
    bundle.note(bundle.path("importance.csv"));
  });

  stage("mse curve", [&] {
    const auto curve = mse_curve_from_model(model, d, checkpoints_from(config, cfg.n_trees));
    write_mse_curve_csv(bundle.path("mse_curve.csv"), curve);
    bundle.note(bundle.path("mse_curve.csv"));
  });

  stage("partial effects", [&] {
    const int n_points = config.value("grid_points", 41);
    std::vector<std::string> features = model.feature_names;
    if (config.contains("pd_features")) {
      features = config["pd_features"].get<std::vector<std::string>>();
    }
    for (const auto& f : features) {
      const PartialEffectGrid g = partial_effect_1d(model, d, f, make_grid(d, f, n_points));
      const fs::path p = bundle.path("pd_" + safe_name(f) + ".csv");
      write_partial_effect_csv(p, g);
      bundle.note(p);
    }
    if (config.contains("pd_pairs")) {
      for (const auto& pr : config["pd_pairs"]) {
        const auto f1 = pr[0].get<std::string>();
        const auto f2 = pr[1].get<std::string>();
        const PartialEffectGrid g = partial_effect_2d(model, d, f1, f2,
                                                      make_grid(d, f1, n_points),
                                                      make_grid(d, f2, n_points));
        const fs::path p = bundle.path("pd2_" + safe_name(f1) + "_" + safe_name(f2) + ".csv");
        write_partial_effect_csv(p, g);
        bundle.note(p);
      }
    }
  });

  if (!horizons.empty() && !price_column.empty() && panel.has(price_column)) {
    const auto tables = stage("forecast", [&] {
      return forecast_tables(d, panel, price_column, horizons, cfg, opts.threads);
    });
    stage("write forecast", [&] { write_forecast_outputs(bundle, tables); });
  }

  if (config.contains("ranges")) {
    std::vector<DateRange> ranges;
    for (const auto& r : config["ranges"]) {
      ranges.push_back(DateRange{r["name"].get<std::string>(),
                                 parse_config_date(r["from"], "range from"),
                                 parse_config_date(r["to"], "range to")});
    }
    const SubsampleStudy study =
        stage("subsample study", [&] { return subsample_study(d, ranges, cfg, opts.threads); });
    for (const auto& warning : study.warnings) std::cerr << "warning: " << warning << '\n';
    stage("write subsample study", [&] {
      for (const auto& [name, report] : study.reports) {
        const fs::path p = bundle.path("importance_" + safe_name(name) + ".csv");
        write_importance_csv(p, report);
        bundle.note(p);
      }
    });
  }

  write_manifest(bundle, "run", resolved, cfg.seed, opts.threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-ensemble regression toolkit for daily financial panels"};
  app.require_subcommand(1);

  CommonOpts opts;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"run", "Full experiment: data, forest, baselines, reports"},
      {"ingest", "Build a model dataset from raw series CSVs"},
      {"synth", "Generate a synthetic benchmark dataset"},
      {"fit", "Train a forest on a dataset CSV"},
      {"eval", "Evaluate a saved model against the linear baselines"},
      {"importance", "Split-based predictor importance (optionally per date range)"},
      {"pdp", "Partial-effect grids from a saved model"},
      {"forecast", "Refit and compare across forecast horizons"},
      {"sweep", "Refit across minimum-node-size values"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config_path, "JSON config (or a manifest to replay)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "Override the config's random seed");
    sub->add_option("--threads", opts.threads, "Worker threads for forest training")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", opts.out_dir, "Output directory (default: out)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage problems are config errors
  }

  const std::string command = app.get_subcommands().front()->get_name();
  Bundle bundle;
  bundle.dir = opts.out_dir;
  try {
    const json config = load_config(command, opts);
    std::error_code ec;
    fs::create_directories(bundle.dir, ec);
    if (ec) throw DataError("cannot create output directory " + bundle.dir.string());

    if (command == "run") {
      cmd_run(config, opts, bundle);
    } else if (command == "ingest") {
      cmd_ingest(config, opts, bundle);
    } else if (command == "synth") {
      cmd_synth(config, opts, bundle);
    } else if (command == "fit") {
      cmd_fit(config, opts, bundle);
    } else if (command == "eval") {
      cmd_eval(config, opts, bundle);
    } else if (command == "importance") {
      cmd_importance(config, opts, bundle);
    } else if (command == "pdp") {
      cmd_pdp(config, opts, bundle);
    } else if (command == "forecast") {
      cmd_forecast(config, opts, bundle);
    } else if (command == "sweep") {
      cmd_sweep(config, opts, bundle);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    bundle.discard();
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    bundle.discard();
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    bundle.discard();
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    bundle.discard();
    return 1;
  }
}
