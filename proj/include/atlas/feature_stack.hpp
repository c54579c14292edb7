// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Covariate rasters sharing one grid, with the land mask and continent bands
// used by map inference. Described by a JSON manifest:
//
//   {
//     "bands": [
//       {"name": "bio1", "kind": "continuous", "file": "bio1.asc", "group": "climate"},
//       {"name": "soil", "kind": "categorical", "file": "soil.asc", "categories": [1, 2, 3]}
//     ],
//     "land_mask": "land.asc",
//     "continent": {"file": "continent.asc", "labels": {"1": "AF", "2": "SA"}},
//     "append_coordinates": true
//   }
//
// Categorical bands are one-hot encoded over their listed categories. When
// `append_coordinates` is set, lon and lat are the last two features.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "atlas/grid.hpp"
#include "atlas/raster.hpp"

namespace atlas {

enum class BandKind { Continuous, Categorical };

struct BandSpec {
  std::string name;
  BandKind kind = BandKind::Continuous;
  std::filesystem::path file;
  std::string group;
  std::vector<long long> categories;  // categorical only
};

struct ContinentBand {
  RasterLayer layer;
  std::map<long long, std::string> labels;  // code → continent name; default: the code itself
};

class FeatureStack {
 public:
  FeatureStack(std::vector<BandSpec> specs, std::vector<RasterLayer> bands, RasterLayer land_mask,
               std::optional<ContinentBand> continent, bool append_coordinates);

  /// Reads the manifest and every referenced .asc (paths relative to the manifest).
  static FeatureStack load(const std::filesystem::path& manifest);

  const GridSpec& grid() const noexcept { return land_mask_.grid(); }
  std::size_t dim() const noexcept { return dim_; }
  std::vector<std::string> feature_names() const;
  const std::vector<BandSpec>& bands() const noexcept { return specs_; }
  const RasterLayer& land_mask() const noexcept { return land_mask_; }
  bool has_continent() const noexcept { return continent_.has_value(); }

  std::optional<std::pair<std::size_t, std::size_t>> locate(double lon, double lat) const {
    return grid().locate(lon, lat);
  }
  bool is_land(std::size_t row, std::size_t col) const;
  /// Continent label of a cell; nullopt when the band is missing or nodata there.
  std::optional<std::string> continent_at(std::size_t row, std::size_t col) const;

  /// Features of a stack cell; the appended coordinates are the cell centre.
  /// Returns false when any band is nodata at the cell.
  bool features_at_cell(std::size_t row, std::size_t col, int patch_radius,
                        std::span<double> out) const;
  /// Features at an arbitrary point (nearest cell); the appended coordinates
  /// are the point itself. Returns false outside the grid or on nodata.
  bool features_at(double lon, double lat, int patch_radius, std::span<double> out) const;

 private:
  bool fill(std::size_t row, std::size_t col, double lon, double lat, int patch_radius,
            std::span<double> out) const;

  std::vector<BandSpec> specs_;
  std::vector<RasterLayer> bands_;
  RasterLayer land_mask_;
  std::optional<ContinentBand> continent_;
  bool append_coordinates_ = true;
  std::size_t dim_ = 0;
};

}  // namespace atlas
