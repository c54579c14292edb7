// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Region-level aggregation of indicator rasters, region rankings and rank
// correlation between two regional statistics.

#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "atlas/domain.hpp"
#include "atlas/raster.hpp"
#include "atlas/regions.hpp"

namespace atlas {

struct ZonalOptions {
  /// Regions whose area is below this are left out of every table.
  double min_area_km2 = 2000.0;
};

/// Per-region values keyed by region name.
struct ZonalResult {
  std::map<std::string, double> values;
  std::vector<std::string> warnings;
};

/// Region area: the catalog value when present, otherwise the summed area of
/// the region's cells.
std::map<std::int32_t, double> region_areas_km2(const RegionRaster& regions);

/// 100 · #(cells with I_O = c) / #(cells with any I_O), per region.
ZonalResult zonal_area_pct(const RasterLayer& io, const RegionRaster& regions, Status c,
                           const ZonalOptions& options = {});

struct AreaShares {
  std::map<std::string, std::array<double, 5>> by_region;  // indexed by status rank
  std::vector<std::string> warnings;
};
AreaShares zonal_area_pct_all(const RasterLayer& io, const RegionRaster& regions,
                              const ZonalOptions& options = {});

/// Mean of the non-nodata cells of each region.
ZonalResult zonal_mean(const RasterLayer& layer, const RegionRaster& regions,
                       const ZonalOptions& options = {});

enum class RankOrder { Descending, Ascending };

struct RankedRegion {
  std::string region;
  double value = 0.0;
  std::string display;  // rounded to 2 decimals
};

/// Top-k regions; ties are broken by name. Throws RangeError for k <= 0.
std::vector<RankedRegion> rank_regions(const std::map<std::string, double>& stat, int k,
                                       RankOrder order = RankOrder::Descending);

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;
  bool exact = false;  // p from full permutation enumeration
  std::size_t n = 0;
};

/// Average ranks for ties.
std::vector<double> average_ranks(std::span<const double> x);

/// Two-sided test. Exact permutation p-value for n <= 10, Student t otherwise.
/// Throws DimensionError for unequal lengths or n < 3, RangeError for a
/// constant input.
SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

}  // namespace atlas
