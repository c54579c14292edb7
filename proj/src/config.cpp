// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include "atlas/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "atlas/error.hpp"

namespace atlas {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.contains(key))
      throw ConfigError((where.empty() ? key : where + "." + key) + ": unknown key");
}

template <class T>
T get(const json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(field + ": wrong type (" + j.dump() + ")");
  }
}

template <class T>
void read(const json& section, const std::string& where, const char* key, T& out) {
  if (section.contains(key)) out = get<T>(section.at(key), where + "." + key);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

Split parse_split_name(const std::string& s, const std::string& field) {
  if (s == "train") return Split::Train;
  if (s == "validation") return Split::Validation;
  if (s == "test") return Split::Test;
  throw ConfigError(field + ": expected train, validation or test, got '" + s + "'");
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::string::size_type start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("--set: malformed key '" + key + "'");
    if (!node->is_object()) throw ConfigError("--set: '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

}  // namespace

void require_file(const std::filesystem::path& path, const std::string& field) {
  if (!std::filesystem::exists(path))
    throw ConfigError(field + ": file not found: " + path.string());
}

RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir,
                       const std::vector<std::string>& overrides) {
  json doc = json::parse(json_text, nullptr, false, true);
  if (doc.is_discarded()) throw ConfigError("config is not valid JSON");
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& o : overrides) apply_override(doc, o);

  check_keys(doc, "", {"paths", "split", "features", "train", "conformal", "grid", "map",
                       "statuses", "zonal", "eval"});
  RunConfig cfg;
  const json empty = json::object();
  const auto section = [&](const char* name) -> const json& {
    return doc.contains(name) ? doc.at(name) : empty;
  };

  {
    const auto& p = section("paths");
    check_keys(p, "paths", {"occurrences", "statuses", "stack", "regions", "region_catalog", "out",
                            "split", "model"});
    const auto path_field = [&](const char* key) -> std::optional<std::filesystem::path> {
      if (!p.contains(key)) return std::nullopt;
      return resolve(base_dir, get<std::string>(p.at(key), std::string("paths.") + key));
    };
    const auto required = [&](const char* key) {
      auto v = path_field(key);
      if (!v) throw ConfigError(std::string("paths.") + key + ": required");
      return *v;
    };
    cfg.paths.occurrences = required("occurrences");
    cfg.paths.statuses = required("statuses");
    cfg.paths.stack = required("stack");
    cfg.paths.regions = path_field("regions");
    cfg.paths.region_catalog = path_field("region_catalog");
    cfg.paths.out = path_field("out").value_or(resolve(base_dir, "out"));
    cfg.paths.split = path_field("split");
    cfg.paths.model = path_field("model");
  }
  {
    const auto& s = section("split");
    check_keys(s, "split", {"block_size", "ratios", "seed"});
    read(s, "split", "block_size", cfg.split.block_size);
    read(s, "split", "seed", cfg.split.seed);
    if (s.contains("ratios")) {
      const auto r = get<std::vector<double>>(s.at("ratios"), "split.ratios");
      if (r.size() != 3) throw ConfigError("split.ratios: expected [train, validation, test]");
      cfg.split.ratios = {r[0], r[1], r[2]};
    }
    if (!(cfg.split.block_size > 0)) throw ConfigError("split.block_size: must be positive");
    const auto& r = cfg.split.ratios;
    if (r.train < 0 || r.validation < 0 || r.test < 0 ||
        std::abs(r.train + r.validation + r.test - 1.0) > 1e-9)
      throw ConfigError("split.ratios: must be non-negative and sum to 1");
  }
  {
    const auto& f = section("features");
    check_keys(f, "features", {"patch_radius"});
    read(f, "features", "patch_radius", cfg.patch_radius);
    if (cfg.patch_radius < 0) throw ConfigError("features.patch_radius: must be >= 0");
    cfg.map.patch_radius = cfg.patch_radius;
  }
  {
    const auto& t = section("train");
    check_keys(t, "train", {"epochs", "batch_size", "learning_rate", "decay_epochs", "decay_factor",
                            "seed", "loss", "margin", "reweight_start", "reweight_beta",
                            "init_stddev", "retrain_full", "metric_k"});
    auto& tc = cfg.train.train;
    read(t, "train", "epochs", tc.epochs);
    read(t, "train", "batch_size", tc.batch_size);
    read(t, "train", "learning_rate", tc.learning_rate.initial);
    read(t, "train", "decay_epochs", tc.learning_rate.decay_epochs);
    read(t, "train", "decay_factor", tc.learning_rate.decay_factor);
    read(t, "train", "seed", tc.seed);
    read(t, "train", "margin", tc.margin);
    read(t, "train", "reweight_beta", tc.reweight_beta);
    read(t, "train", "init_stddev", tc.init_stddev);
    read(t, "train", "retrain_full", cfg.train.retrain_full);
    read(t, "train", "metric_k", cfg.train.metric_k);
    if (t.contains("reweight_start") && !t.at("reweight_start").is_null())
      tc.reweight_start = get<int>(t.at("reweight_start"), "train.reweight_start");
    if (t.contains("loss")) {
      const auto loss = get<std::string>(t.at("loss"), "train.loss");
      if (loss == "cross_entropy") tc.loss = LossVariant::CrossEntropy;
      else if (loss == "margin") tc.loss = LossVariant::MarginRebalanced;
      else throw ConfigError("train.loss: expected cross_entropy or margin, got '" + loss + "'");
    }
    if (cfg.train.metric_k == 0) throw ConfigError("train.metric_k: must be >= 1");
    tc.validate();
  }
  {
    const auto& c = section("conformal");
    check_keys(c, "conformal", {"epsilon", "calibration_split", "lambda"});
    read(c, "conformal", "epsilon", cfg.conformal.epsilon);
    if (c.contains("calibration_split"))
      cfg.conformal.calibration_split = parse_split_name(
          get<std::string>(c.at("calibration_split"), "conformal.calibration_split"),
          "conformal.calibration_split");
    if (c.contains("lambda") && !c.at("lambda").is_null())
      cfg.conformal.lambda = get<double>(c.at("lambda"), "conformal.lambda");
    if (!(cfg.conformal.epsilon >= 0 && cfg.conformal.epsilon <= 1))
      throw ConfigError("conformal.epsilon: must lie in [0, 1]");
    if (cfg.conformal.lambda && !(*cfg.conformal.lambda >= 0 && *cfg.conformal.lambda <= 1))
      throw ConfigError("conformal.lambda: must lie in [0, 1]");
  }
  {
    const auto& g = section("grid");
    check_keys(g, "grid", {"lon0", "lon1", "lat0", "lat1", "step", "drop_antimeridian"});
    read(g, "grid", "drop_antimeridian", cfg.grid.drop_antimeridian);
    if (g.contains("lon0") || g.contains("lon1") || g.contains("lat0") || g.contains("lat1") ||
        g.contains("step")) {
      GridSpec spec;
      read(g, "grid", "lon0", spec.lon0);
      read(g, "grid", "lon1", spec.lon1);
      read(g, "grid", "lat0", spec.lat0);
      read(g, "grid", "lat1", spec.lat1);
      read(g, "grid", "step", spec.step);
      try {
        spec.validate();
      } catch (const Error& e) {
        throw ConfigError(std::string("grid: ") + e.what());
      }
      cfg.grid.spec = spec;
    }
  }
  {
    const auto& m = section("map");
    check_keys(m, "map", {"indicators", "batch_size", "buffer_cells", "workers"});
    read(m, "map", "batch_size", cfg.map.batch_size);
    read(m, "map", "buffer_cells", cfg.map.buffer_cells);
    read(m, "map", "workers", cfg.map.workers);
    if (m.contains("indicators")) {
      for (const auto& name : get<std::vector<std::string>>(m.at("indicators"), "map.indicators"))
        cfg.indicators.push_back(parse_indicator(name));
    } else {
      cfg.indicators = all_indicators(true);
    }
    if (cfg.indicators.empty()) throw ConfigError("map.indicators: empty");
    if (cfg.map.batch_size == 0) throw ConfigError("map.batch_size: must be >= 1");
    if (cfg.map.buffer_cells == 0) throw ConfigError("map.buffer_cells: must be >= 1");
    if (cfg.map.workers == 0) throw ConfigError("map.workers: must be >= 1");
  }
  {
    const auto& s = section("statuses");
    check_keys(s, "statuses", {"precedence"});
    if (s.contains("precedence")) {
      const auto p = get<std::string>(s.at("precedence"), "statuses.precedence");
      if (p == "assessed_first") cfg.precedence = StatusPrecedence::AssessedFirst;
      else if (p == "predicted_first") cfg.precedence = StatusPrecedence::PredictedFirst;
      else throw ConfigError("statuses.precedence: expected assessed_first or predicted_first");
    }
  }
  {
    const auto& z = section("zonal");
    check_keys(z, "zonal", {"min_area_km2", "top_k", "ratios"});
    read(z, "zonal", "min_area_km2", cfg.zonal.options.min_area_km2);
    read(z, "zonal", "top_k", cfg.zonal.top_k);
    if (z.contains("ratios")) {
      for (const auto& pair : get<std::vector<std::vector<std::string>>>(z.at("ratios"), "zonal.ratios")) {
        if (pair.size() != 2) throw ConfigError("zonal.ratios: each entry is [numerator, denominator]");
        cfg.zonal.ratios.emplace_back(parse_indicator(pair[0]).name(), parse_indicator(pair[1]).name());
      }
    } else {
      for (auto k : {"I_LC", "I_NT", "I_VU", "I_EN", "I_CR", "I_THREAT"})
        cfg.zonal.ratios.emplace_back(k, std::string(k) + "_IUCN");
    }
    if (cfg.zonal.top_k <= 0) throw ConfigError("zonal.top_k: must be positive");
    if (cfg.zonal.options.min_area_km2 < 0) throw ConfigError("zonal.min_area_km2: must be >= 0");
  }
  {
    const auto& e = section("eval");
    check_keys(e, "eval", {"k", "split"});
    read(e, "eval", "k", cfg.eval_k);
    if (e.contains("split"))
      cfg.eval_split = parse_split_name(get<std::string>(e.at("split"), "eval.split"), "eval.split");
    if (cfg.eval_k.empty()) throw ConfigError("eval.k: empty");
    for (auto k : cfg.eval_k)
      if (k == 0) throw ConfigError("eval.k: values must be >= 1");
  }
  cfg.echo = doc.dump();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto base = std::filesystem::absolute(path).parent_path();
  return parse_config(buf.str(), base, overrides);
}

}  // namespace atlas
