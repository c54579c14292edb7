// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Run configuration shared by all subcommands: one JSON document, optionally
// patched with `key=value` overrides.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "atlas/conformal.hpp"
#include "atlas/domain.hpp"
#include "atlas/grid.hpp"
#include "atlas/map_pipeline.hpp"
#include "atlas/softmax_model.hpp"
#include "atlas/spatial_split.hpp"
#include "atlas/zonal.hpp"

namespace atlas {

struct PathsConfig {
  std::filesystem::path occurrences;
  std::filesystem::path statuses;
  std::filesystem::path stack;  // feature stack manifest
  std::optional<std::filesystem::path> regions;
  std::optional<std::filesystem::path> region_catalog;
  std::filesystem::path out = "out";
  std::optional<std::filesystem::path> split;  // precomputed block split
  std::optional<std::filesystem::path> model;  // default: <out>/model.txt
};

struct SplitConfig {
  double block_size = kDefaultBlockSizeDeg;
  SplitRatios ratios;
  std::uint64_t seed = 0;
};

struct TrainSection {
  TrainConfig train;
  bool retrain_full = false;
  std::size_t metric_k = 30;
};

struct ConformalConfig {
  double epsilon = kDefaultEpsilon;
  Split calibration_split = Split::Validation;
  std::optional<double> lambda;  // skips <out>/calibration.json when set
};

struct GridConfig {
  std::optional<GridSpec> spec;  // default: the feature stack grid
  bool drop_antimeridian = false;
};

struct ZonalConfig {
  ZonalOptions options;
  int top_k = 15;
  /// Pairs of indicator names reported as per-region mean ratios.
  std::vector<std::pair<std::string, std::string>> ratios;
};

struct RunConfig {
  PathsConfig paths;
  SplitConfig split;
  int patch_radius = 0;
  TrainSection train;
  ConformalConfig conformal;
  GridConfig grid;
  MapOptions map;
  std::vector<IndicatorRequest> indicators;
  StatusPrecedence precedence = StatusPrecedence::AssessedFirst;
  ZonalConfig zonal;
  std::vector<std::size_t> eval_k{1, 5, 10, 30};
  Split eval_split = Split::Test;

  /// Canonical one-line JSON of the effective configuration.
  std::string echo;

  std::filesystem::path model_path() const { return paths.model.value_or(paths.out / "model.txt"); }
};

/// Parses and validates. Relative paths resolve against `base_dir`. Every
/// `overrides` entry is `dotted.key=value`, the value parsed as JSON when
/// possible and as a string otherwise. Throws ConfigError.
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir,
                       const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});

/// Throws ConfigError naming the field when a required input file is missing.
void require_file(const std::filesystem::path& path, const std::string& field);

}  // namespace atlas
