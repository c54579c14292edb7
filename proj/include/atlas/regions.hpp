// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Rasterized region identifiers plus their catalog.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "atlas/grid.hpp"
#include "atlas/raster.hpp"

namespace atlas {

struct RegionInfo {
  std::int32_t id = 0;
  std::string name;
  std::optional<double> area_km2;  // when absent, the area is measured from the raster
};

using RegionCatalog = std::map<std::int32_t, RegionInfo>;

/// `region_id,name,area_km2`; the area column may be empty.
RegionCatalog read_region_catalog(std::istream& in, const std::string& source = "<stream>");
RegionCatalog load_region_catalog(const std::filesystem::path& path);

class RegionRaster {
 public:
  RegionRaster() = default;
  /// Cells hold region ids or the layer's nodata. Ids missing from the catalog
  /// are added with their numeric id as name.
  RegionRaster(RasterLayer ids, RegionCatalog catalog);

  const GridSpec& grid() const noexcept { return ids_.grid(); }
  const RasterLayer& layer() const noexcept { return ids_; }
  const RegionCatalog& catalog() const noexcept { return catalog_; }
  /// Region id at a cell, nullopt for nodata.
  std::optional<std::int32_t> at(std::size_t row, std::size_t col) const;
  const RegionInfo& info(std::int32_t id) const { return catalog_.at(id); }

 private:
  RasterLayer ids_;
  RegionCatalog catalog_;
};

RegionRaster load_region_raster(const std::filesystem::path& raster,
                                const std::optional<std::filesystem::path>& catalog);

/// Spherical area of the cell centred on `lat` (degrees) with side `step` degrees.
double cell_area_km2(double lat, double step);

}  // namespace atlas
