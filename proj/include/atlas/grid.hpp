// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Regular lon/lat sampling with inclusive endpoints.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace atlas {

inline constexpr double kDefaultGridStepDeg = 30.0 / 3600.0;

/// Points lon0, lon0 + r, ..., lon1 (and the same for latitude); rows run
/// north to south. Each point is the centre of one raster cell.
struct GridSpec {
  double lon0 = -180.0;
  double lon1 = 180.0;
  double lat0 = -90.0;
  double lat1 = 90.0;
  double step = kDefaultGridStepDeg;

  /// Throws RangeError.
  void validate() const;
  std::size_t cols() const;
  std::size_t rows() const;
  std::size_t cell_count() const { return rows() * cols(); }

  double lon(std::size_t col) const { return lon0 + static_cast<double>(col) * step; }
  double lat(std::size_t row) const {
    return lat0 + static_cast<double>(rows() - 1 - row) * step;
  }

  /// Nearest cell (row, col) to a coordinate, or nullopt if it lies more than
  /// half a cell outside the grid.
  std::optional<std::pair<std::size_t, std::size_t>> locate(double lon, double lat) const;

  /// Same sampling within a relative tolerance on the step.
  bool matches(const GridSpec& other) const;

  /// Removes the duplicated +180 meridian column of a full-longitude grid.
  GridSpec without_antimeridian() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct GridPoint {
  std::size_t row = 0;
  std::size_t col = 0;
  double lon = 0.0;
  double lat = 0.0;
};

class RasterLayer;

struct LandGrid {
  std::vector<GridPoint> points;  // row-major order
  std::vector<std::string> warnings;
};

/// Points of `spec` whose nearest land-mask cell is land (non-nodata, non-zero).
LandGrid build_grid(const GridSpec& spec, const RasterLayer& land_mask);

}  // namespace atlas
