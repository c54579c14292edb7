// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include "atlas/grid.hpp"

#include <cmath>

#include "atlas/error.hpp"
#include "atlas/raster.hpp"

namespace atlas {

void GridSpec::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw RangeError("grid.step", "grid step must be > 0");
  if (!(lon1 > lon0)) throw RangeError("grid.lon1", "grid needs lon1 > lon0");
  if (!(lat1 > lat0)) throw RangeError("grid.lat1", "grid needs lat1 > lat0");
}

std::size_t GridSpec::cols() const {
  return static_cast<std::size_t>(std::llround((lon1 - lon0) / step)) + 1;
}

std::size_t GridSpec::rows() const {
  return static_cast<std::size_t>(std::llround((lat1 - lat0) / step)) + 1;
}

std::optional<std::pair<std::size_t, std::size_t>> GridSpec::locate(double lon, double lat) const {
  const double c = std::round((lon - lon0) / step);
  const double r_from_south = std::round((lat - lat0) / step);
  const auto ncols = static_cast<double>(cols());
  const auto nrows = static_cast<double>(rows());
  if (!(c >= 0.0 && c < ncols && r_from_south >= 0.0 && r_from_south < nrows)) return std::nullopt;
  const auto row = static_cast<std::size_t>(nrows - 1.0 - r_from_south);
  return std::pair{row, static_cast<std::size_t>(c)};
}

bool GridSpec::matches(const GridSpec& o) const {
  const double tol = 1e-6 * step;
  return cols() == o.cols() && rows() == o.rows() && std::abs(step - o.step) <= tol &&
         std::abs(lon0 - o.lon0) <= tol && std::abs(lat0 - o.lat0) <= tol;
}

GridSpec GridSpec::without_antimeridian() const {
  GridSpec g = *this;
  if (std::abs((lon1 - lon0) - 360.0) <= 0.5 * step) g.lon1 = lon0 + static_cast<double>(cols() - 2) * step;
  return g;
}

LandGrid build_grid(const GridSpec& spec, const RasterLayer& land_mask) {
  spec.validate();
  LandGrid out;
  const std::size_t rows = spec.rows();
  const std::size_t cols = spec.cols();
  std::size_t inside = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double lat = spec.lat(r);
    for (std::size_t c = 0; c < cols; ++c) {
      const double lon = spec.lon(c);
      const auto cell = land_mask.grid().locate(lon, lat);
      if (!cell) continue;
      ++inside;
      const double v = land_mask.at(cell->first, cell->second);
      if (!land_mask.is_nodata(v) && v != 0.0) out.points.push_back(GridPoint{r, c, lon, lat});
    }
  }
  if (inside == 0) out.warnings.push_back("grid does not intersect the land mask");
  else if (out.points.empty()) out.warnings.push_back("no land cells inside the grid");
  return out;
}

}  // namespace atlas
