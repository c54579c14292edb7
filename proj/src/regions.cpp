// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include "atlas/regions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>

#include "atlas/error.hpp"
#include "atlas/text.hpp"

namespace atlas {

RegionCatalog read_region_catalog(std::istream& in, const std::string& source) {
  text::LineReader reader(in);
  std::string line;
  if (!reader.next(line) || text::trim(line) != "region_id,name,area_km2")
    throw ParseError(source, reader.line_number(), "expected header 'region_id,name,area_km2'");
  RegionCatalog catalog;
  while (reader.next(line)) {
    const auto f = text::split(line, ',');
    if (f.size() != 3) throw ParseError(source, reader.line_number(), "expected 3 fields");
    const auto id = text::parse_int(f[0]);
    if (!id) throw ParseError(source, reader.line_number(), "bad region id");
    RegionInfo info{static_cast<std::int32_t>(*id), std::string(text::trim(f[1])), std::nullopt};
    if (info.name.empty()) throw ParseError(source, reader.line_number(), "empty region name");
    if (!text::trim(f[2]).empty()) {
      const auto area = text::parse_double(f[2]);
      if (!area || *area < 0) throw ParseError(source, reader.line_number(), "bad area_km2");
      info.area_km2 = *area;
    }
    if (!catalog.emplace(info.id, info).second)
      throw ParseError(source, reader.line_number(), "duplicate region id " + std::to_string(*id));
  }
  return catalog;
}

RegionCatalog load_region_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_region_catalog(in, path.string());
}

RegionRaster::RegionRaster(RasterLayer ids, RegionCatalog catalog)
    : ids_(std::move(ids)), catalog_(std::move(catalog)) {
  for (double v : ids_.values()) {
    if (ids_.is_nodata(v)) continue;
    if (v != std::round(v)) throw RangeError("region", "region ids must be integers");
    const auto id = static_cast<std::int32_t>(v);
    if (!catalog_.contains(id)) catalog_.emplace(id, RegionInfo{id, std::to_string(id), std::nullopt});
  }
}

std::optional<std::int32_t> RegionRaster::at(std::size_t row, std::size_t col) const {
  const double v = ids_.at(row, col);
  if (ids_.is_nodata(v)) return std::nullopt;
  return static_cast<std::int32_t>(v);
}

RegionRaster load_region_raster(const std::filesystem::path& raster,
                                const std::optional<std::filesystem::path>& catalog) {
  auto layer = read_ascii_grid(raster, ValueKind::Integer);
  return RegionRaster(std::move(layer), catalog ? load_region_catalog(*catalog) : RegionCatalog{});
}

double cell_area_km2(double lat, double step) {
  constexpr double kEarthRadiusKm = 6371.0088;
  constexpr double deg = std::numbers::pi / 180.0;
  const double top = std::clamp(lat + step / 2, -90.0, 90.0);
  const double bottom = std::clamp(lat - step / 2, -90.0, 90.0);
  return kEarthRadiusKm * kEarthRadiusKm * (step * deg) *
         std::abs(std::sin(top * deg) - std::sin(bottom * deg));
}

}  // namespace atlas
