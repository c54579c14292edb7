// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include "atlas/commands.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "atlas/assemblage_post.hpp"
#include "atlas/conformal.hpp"
#include "atlas/error.hpp"
#include "atlas/feature_stack.hpp"
#include "atlas/map_pipeline.hpp"
#include "atlas/metrics.hpp"
#include "atlas/regions.hpp"
#include "atlas/spatial_split.hpp"
#include "atlas/text.hpp"
#include "atlas/zonal.hpp"

namespace atlas::cli {

namespace {

using text::format_shortest;

std::ofstream open_output(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void close_output(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

void config_comment(std::ostream& out, const RunConfig& cfg) { out << "# config: " << cfg.echo << '\n'; }

/// Occurrences, the feature stack, and every occurrence's feature row.
struct Inputs {
  OccurrenceDataset data;
  FeatureStack stack;
  std::vector<BlockId> blocks;
  std::vector<bool> usable;      // features available for the occurrence
  std::vector<double> features;  // n × dim, zero rows where unusable
};

Inputs load_inputs(const RunConfig& cfg, std::ostream& log) {
  require_file(cfg.paths.occurrences, "paths.occurrences");
  require_file(cfg.paths.stack, "paths.stack");
  Inputs in{load_occurrences(cfg.paths.occurrences), FeatureStack::load(cfg.paths.stack), {}, {}, {}};
  if (in.data.size() == 0) throw EmptyInputError("no occurrences in " + cfg.paths.occurrences.string());
  in.blocks = assign_blocks(in.data, cfg.split.block_size);
  const std::size_t dim = in.stack.dim();
  in.features.assign(in.data.size() * dim, 0.0);
  in.usable.assign(in.data.size(), false);
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < in.data.size(); ++i) {
    const auto& o = in.data.rows[i];
    auto row = std::span<double>(in.features).subspan(i * dim, dim);
    in.usable[i] = in.stack.features_at(o.lon, o.lat, cfg.patch_radius, row);
    if (!in.usable[i]) ++dropped;
  }
  if (dropped > 0)
    log << "warning: " << dropped << " occurrences have no covariates and are skipped\n";
  return in;
}

SplitAssignment make_split(const RunConfig& cfg, const Inputs& in, std::ostream& log) {
  SplitAssignment split;
  if (cfg.paths.split) {
    require_file(*cfg.paths.split, "paths.split");
    std::ifstream s(*cfg.paths.split);
    split = read_split_csv(s, in.blocks, cfg.paths.split->string());
  } else {
    split = split_blocks(in.data, in.blocks, cfg.split.ratios, cfg.split.seed);
    split = repair_orphans(std::move(split), in.data, in.blocks);
  }
  for (const auto& w : split.warnings) log << "warning: " << w << '\n';
  return split;
}

LabeledSamples samples_of(const Inputs& in, const std::vector<std::size_t>& indices) {
  const std::size_t dim = in.stack.dim();
  LabeledSamples out(dim);
  for (auto i : indices)
    if (in.usable[i])
      out.add(std::span<const double>(in.features).subspan(i * dim, dim), in.data.rows[i].species);
  return out;
}

LabeledSamples all_samples(const Inputs& in) {
  std::vector<std::size_t> idx(in.data.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return samples_of(in, idx);
}

SoftmaxModel load_checked_model(const RunConfig& cfg, const Inputs& in) {
  const auto path = cfg.model_path();
  require_file(path, "paths.model");
  auto model = load_model(path);
  if (model.dim() != in.stack.dim())
    throw DimensionError("model expects " + std::to_string(model.dim()) + " features, stack has " +
                         std::to_string(in.stack.dim()));
  if (model.classes() != in.data.n_species())
    throw DimensionError("model predicts " + std::to_string(model.classes()) +
                         " species, occurrences name " + std::to_string(in.data.n_species()));
  return model;
}

const char* split_name(Split s) {
  return s == Split::Train ? "train" : s == Split::Validation ? "validation" : "test";
}

}  // namespace

// --- train -------------------------------------------------------------------

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  const auto in = load_inputs(cfg, log);
  const auto split = make_split(cfg, in, log);
  const auto train_set = samples_of(in, occurrences_in(split, Split::Train));
  const auto val_set = samples_of(in, occurrences_in(split, Split::Validation));
  const std::size_t classes = in.data.n_species();
  const std::size_t k = std::min(cfg.train.metric_k, classes);
  log << "train: " << train_set.size() << " training and " << val_set.size()
      << " validation samples, " << classes << " species, " << in.stack.dim() << " features\n";

  const auto metrics_path = cfg.paths.out / "metrics.csv";
  auto metrics = open_output(metrics_path);
  config_comment(metrics, cfg);
  metrics << "epoch,learning_rate,mean_loss,val_micro_top" << k << ",val_macro_top" << k << '\n';
  const auto on_epoch = [&](const EpochRecord& rec, const SoftmaxModel& model) {
    metrics << rec.epoch << ',' << format_shortest(rec.learning_rate) << ','
            << format_shortest(rec.mean_loss) << ',';
    if (val_set.empty()) {
      metrics << "NA,NA\n";
    } else {
      const auto s = top_k_scores(model, val_set, k);
      metrics << format_shortest(s.micro) << ',' << format_shortest(s.macro) << '\n';
    }
  };
  auto result = train(train_set, classes, cfg.train.train, on_epoch);
  close_output(metrics, metrics_path);
  if (result.tally.clamped > 0)
    log << "warning: probability floor applied " << result.tally.clamped << " times\n";
  result.model.config_echo = cfg.echo;
  save_model(cfg.model_path(), result.model);

  const auto split_path = cfg.paths.out / "split.csv";
  auto split_out = open_output(split_path);
  config_comment(split_out, cfg);
  write_split_csv(split_out, split);
  close_output(split_out, split_path);

  const auto prior_path = cfg.paths.out / "prior.csv";
  auto prior_out = open_output(prior_path);
  config_comment(prior_out, cfg);
  write_prior_csv(prior_out, build_continent_prior(in.data), in.data.species);
  close_output(prior_out, prior_path);

  if (cfg.train.retrain_full) {
    auto full = train(all_samples(in), classes, cfg.train.train);
    full.model.config_echo = cfg.echo;
    save_model(cfg.paths.out / "model_full.txt", full.model);
  }
  if (!result.history.empty())
    log << "train: final mean loss " << format_shortest(result.history.back().mean_loss) << '\n';
}

// --- calibrate ---------------------------------------------------------------

void cmd_calibrate(const RunConfig& cfg, std::ostream& log) {
  const auto in = load_inputs(cfg, log);
  const auto model = load_checked_model(cfg, in);
  const auto split = make_split(cfg, in, log);
  const auto samples = samples_of(in, occurrences_in(split, cfg.conformal.calibration_split));
  if (samples.empty())
    throw EmptyInputError(std::string("calibration split '") +
                          split_name(cfg.conformal.calibration_split) + "' is empty");

  const auto result = calibrate(model, samples, cfg.conformal.epsilon);
  const std::size_t k = std::min(cfg.train.metric_k, model.classes());
  const auto probs = predict_all(model, samples);
  const auto scores = top_k_scores(probs, model.classes(), samples.labels, k);
  const auto sizes = set_sizes(probs, model.classes(), result.lambda);
  const auto summary = summarize_set_sizes(sizes);

  const auto txt_path = cfg.paths.out / "calibration.txt";
  auto txt = open_output(txt_path);
  config_comment(txt, cfg);
  const auto row = [&](const std::string& key, const std::string& value) {
    txt << key << std::string(key.size() < 18 ? 18 - key.size() : 1, ' ') << value << '\n';
  };
  row("lambda", format_shortest(result.lambda));
  row("epsilon", format_shortest(result.epsilon));
  row("empirical_error", format_shortest(result.empirical_error));
  row("n_calibration", std::to_string(result.n_calibration));
  row("micro_top" + std::to_string(k), format_shortest(scores.micro));
  row("macro_top" + std::to_string(k), format_shortest(scores.macro));
  row("set_size_mean", format_shortest(summary.mean));
  row("set_size_std", format_shortest(summary.std));
  row("set_size_min", format_shortest(summary.min));
  row("set_size_q25", format_shortest(summary.q25));
  row("set_size_median", format_shortest(summary.median));
  row("set_size_q75", format_shortest(summary.q75));
  row("set_size_max", format_shortest(summary.max));
  close_output(txt, txt_path);

  nlohmann::json j;
  j["lambda"] = result.lambda;
  j["epsilon"] = result.epsilon;
  j["empirical_error"] = result.empirical_error;
  j["mean_set_size"] = result.mean_set_size;
  j["n_calibration"] = result.n_calibration;
  j["split"] = split_name(cfg.conformal.calibration_split);
  j["config"] = nlohmann::json::parse(cfg.echo);
  const auto json_path = cfg.paths.out / "calibration.json";
  auto js = open_output(json_path);
  js << j.dump(2) << '\n';
  close_output(js, json_path);
  log << "calibrate: lambda " << format_shortest(result.lambda) << ", empirical error "
      << format_shortest(result.empirical_error) << " on " << result.n_calibration << " samples\n";
}

// --- map ---------------------------------------------------------------------

namespace {

double resolve_lambda(const RunConfig& cfg) {
  if (cfg.conformal.lambda) return *cfg.conformal.lambda;
  const auto path = cfg.paths.out / "calibration.json";
  if (!std::filesystem::exists(path))
    throw ConfigError("conformal.lambda: not set and " + path.string() + " does not exist");
  std::ifstream in(path);
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("lambda") || !j.at("lambda").is_number())
    throw ConfigError("conformal.lambda: " + path.string() + " has no numeric lambda");
  return j.at("lambda").get<double>();
}

}  // namespace

void cmd_map(const RunConfig& cfg, std::ostream& log) {
  const auto in = load_inputs(cfg, log);
  const auto model = load_checked_model(cfg, in);
  require_file(cfg.paths.statuses, "paths.statuses");
  const auto statuses = load_status_table(cfg.paths.statuses).resolve(in.data.species, cfg.precedence);
  const auto prior = build_continent_prior(in.data);

  MapInputs mi;
  mi.model = &model;
  mi.stack = &in.stack;
  mi.lambda = resolve_lambda(cfg);
  mi.prior = &prior;
  mi.statuses = &statuses;
  mi.grid = cfg.grid.spec.value_or(in.stack.grid());
  if (cfg.grid.drop_antimeridian) mi.grid = mi.grid.without_antimeridian();
  mi.indicators = cfg.indicators;
  if (!in.stack.has_continent()) log << "warning: stack has no continent band, prior not applied\n";

  AsciiDirectorySink sink(cfg.paths.out / "maps");
  const auto tally = run_map(mi, cfg.map, sink);

  const auto report_path = cfg.paths.out / "map_report.txt";
  auto report = open_output(report_path);
  config_comment(report, cfg);
  report << "lambda " << format_shortest(mi.lambda) << '\n'
         << "cells " << tally.cells << '\n'
         << "land_cells " << tally.land_cells << '\n'
         << "nodata_feature_cells " << tally.nodata_feature_cells << '\n'
         << "unknown_continent_cells " << tally.unknown_continent_cells << '\n'
         << "empty_before_filter " << tally.empty_before_filter << '\n'
         << "empty_after_filter " << tally.empty_after_filter << '\n'
         << "missing_status_members " << tally.missing_status_members << '\n'
         << "set_size_sum " << tally.set_size_sum << '\n'
         << "filtered_size_sum " << tally.filtered_size_sum << '\n';
  for (const auto& [removed, cells] : tally.removed_histogram)
    report << "removed_by_prior " << removed << ' ' << cells << '\n';
  close_output(report, report_path);

  nlohmann::json prov;
  prov["config"] = nlohmann::json::parse(cfg.echo);
  prov["lambda"] = mi.lambda;
  prov["layers"] = nlohmann::json::array();
  for (const auto& r : mi.indicators) prov["layers"].push_back(r.name() + ".asc");
  const auto prov_path = cfg.paths.out / "maps" / "provenance.json";
  auto p = open_output(prov_path);
  p << prov.dump(2) << '\n';
  close_output(p, prov_path);
  if (tally.nodata_feature_cells > 0)
    log << "warning: " << tally.nodata_feature_cells << " land cells lack covariates\n";
  log << "map: " << sink.written().size() << " rasters, " << tally.land_cells << " land cells\n";
}

// --- zonal -------------------------------------------------------------------

void cmd_zonal(const RunConfig& cfg, std::ostream& log) {
  if (!cfg.paths.regions) throw ConfigError("paths.regions: required for zonal");
  require_file(*cfg.paths.regions, "paths.regions");
  if (cfg.paths.region_catalog) require_file(*cfg.paths.region_catalog, "paths.region_catalog");
  const auto regions = load_region_raster(*cfg.paths.regions, cfg.paths.region_catalog);
  const auto maps = cfg.paths.out / "maps";

  std::vector<std::string> warnings;
  const auto keep = [&](std::vector<std::string> w) {
    for (auto& s : w)
      if (std::find(warnings.begin(), warnings.end(), s) == warnings.end()) warnings.push_back(std::move(s));
  };

  std::map<std::string, std::map<std::string, double>> stats;  // statistic → region → value
  std::map<std::string, std::map<std::string, double>> means;  // indicator → region → mean
  std::size_t layers = 0;
  for (const auto& req : cfg.indicators) {
    const auto path = maps / (req.name() + ".asc");
    if (!std::filesystem::exists(path)) {
      log << "warning: " << path.string() << " missing, skipped\n";
      continue;
    }
    ++layers;
    const auto layer = read_ascii_grid(path, req.value_kind());
    if (req.kind == IndicatorKind::MostCritical) {
      auto shares = zonal_area_pct_all(layer, regions, cfg.zonal.options);
      keep(std::move(shares.warnings));
      const std::string suffix = req.assessed_only ? "_IUCN" : "";
      for (const auto& [region, pct] : shares.by_region)
        for (auto s : kAllStatuses)
          stats["Area_pct_" + std::string(to_string(s)) + suffix][region] = pct[rank(s)];
    } else {
      auto m = zonal_mean(layer, regions, cfg.zonal.options);
      keep(std::move(m.warnings));
      means[req.name()] = m.values;
      stats["mean_" + req.name()] = std::move(m.values);
    }
  }
  if (layers == 0) throw Error("no indicator rasters found under " + maps.string());
  for (const auto& w : warnings) log << "warning: " << w << '\n';

  const auto write_table = [&](const std::filesystem::path& path, const std::string& prefix) {
    auto out = open_output(path);
    config_comment(out, cfg);
    out << "region,statistic,value\n";
    for (const auto& [stat, by_region] : stats) {
      if (!stat.starts_with(prefix)) continue;
      for (const auto& [region, v] : by_region)
        out << region << ',' << stat << ',' << format_shortest(v) << '\n';
    }
    close_output(out, path);
  };
  write_table(cfg.paths.out / "zonal_area_pct.csv", "Area_pct_");
  write_table(cfg.paths.out / "zonal_mean.csv", "mean_");

  {
    const auto path = cfg.paths.out / "rankings.csv";
    auto out = open_output(path);
    config_comment(out, cfg);
    out << "statistic,rank,region,value\n";
    for (const auto& [stat, by_region] : stats) {
      if (by_region.empty()) continue;
      const auto top = rank_regions(by_region, cfg.zonal.top_k, RankOrder::Descending);
      for (std::size_t i = 0; i < top.size(); ++i)
        out << stat << ',' << i + 1 << ',' << top[i].region << ',' << top[i].display << '\n';
    }
    close_output(out, path);
  }
  {
    const auto path = cfg.paths.out / "ratios.csv";
    auto out = open_output(path);
    config_comment(out, cfg);
    out << "region,statistic,value\n";
    for (const auto& [num, den] : cfg.zonal.ratios) {
      const auto a = means.find(num), b = means.find(den);
      if (a == means.end() || b == means.end()) continue;
      for (const auto& [region, v] : a->second) {
        const auto d = b->second.find(region);
        if (d == b->second.end()) continue;
        out << region << ',' << num << '/' << den << ','
            << (d->second == 0.0 ? std::string("NA") : format_shortest(v / d->second)) << '\n';
      }
    }
    close_output(out, path);
  }
  {
    const auto path = cfg.paths.out / "spearman.txt";
    auto out = open_output(path);
    config_comment(out, cfg);
    const auto t = means.find("I_THREAT"), h = means.find("I_H");
    if (t == means.end() || h == means.end()) {
      out << "undefined: mean I_THREAT and mean I_H are both required\n";
    } else {
      std::vector<double> x, y;
      for (const auto& [region, v] : t->second)
        if (auto it = h->second.find(region); it != h->second.end()) {
          x.push_back(v);
          y.push_back(it->second);
        }
      try {
        const auto r = spearman(x, y);
        out << "x mean_I_THREAT\ny mean_I_H\n"
            << "n " << r.n << '\n'
            << "rho " << format_shortest(r.rho) << '\n'
            << "p_value " << format_shortest(r.p_value) << '\n'
            << "method " << (r.exact ? "exact_permutation" : "t_approximation") << '\n';
      } catch (const Error& e) {
        out << "undefined: " << e.what() << '\n';
        log << "warning: spearman undefined: " << e.what() << '\n';
      }
    }
    close_output(out, path);
  }
  log << "zonal: " << layers << " rasters aggregated over " << regions.catalog().size()
      << " regions\n";
}

// --- eval --------------------------------------------------------------------

void cmd_eval(const RunConfig& cfg, std::ostream& log) {
  const auto in = load_inputs(cfg, log);
  const auto model = load_checked_model(cfg, in);
  for (auto k : cfg.eval_k)
    if (k > model.classes())
      throw ConfigError("eval.k: " + std::to_string(k) + " exceeds the " +
                        std::to_string(model.classes()) + " modelled species");
  const auto split = make_split(cfg, in, log);
  const auto samples = samples_of(in, occurrences_in(split, cfg.eval_split));
  if (samples.empty())
    throw EmptyInputError(std::string("evaluation split '") + split_name(cfg.eval_split) + "' is empty");
  const auto probs = predict_all(model, samples);

  const auto path = cfg.paths.out / "eval.csv";
  auto out = open_output(path);
  config_comment(out, cfg);
  out << "k,micro,macro,samples,species\n";
  for (auto k : cfg.eval_k) {
    const auto s = top_k_scores(probs, model.classes(), samples.labels, k);
    out << k << ',' << format_shortest(s.micro) << ',' << format_shortest(s.macro) << ','
        << s.samples << ',' << s.species << '\n';
  }
  close_output(out, path);
  log << "eval: " << samples.size() << " " << split_name(cfg.eval_split) << " samples\n";
}

// --- entry point -------------------------------------------------------------

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Species assemblage and extinction-risk indicator mapping", "atlas"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;

  struct Entry {
    const char* name;
    const char* help;
    void (*run)(const RunConfig&, std::ostream&);
  };
  const Entry entries[] = {
      {"train", "Fit the species model and export the split", cmd_train},
      {"calibrate", "Choose the set threshold on held-out data", cmd_calibrate},
      {"map", "Write indicator rasters", cmd_map},
      {"zonal", "Aggregate indicator rasters over regions", cmd_zonal},
      {"eval", "Top-k accuracy on the test split", cmd_eval},
  };
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--set", overrides, "Override a config value, key=value");
    sub->add_option("--out", out_dir, "Output directory (overrides paths.out)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  const auto* chosen = app.get_subcommands().front();
  const std::string stage = chosen->get_name();
  try {
    if (!out_dir.empty())
      overrides.push_back("paths.out=" + nlohmann::json(std::filesystem::absolute(out_dir).string()).dump());
    const auto cfg = load_config(config_path, overrides);
    for (const auto& e : entries)
      if (stage == e.name) e.run(cfg, err);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "atlas " << stage << ": configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DimensionError& e) {
    err << "atlas " << stage << ": validation error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "atlas " << stage << ": error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace atlas::cli
