// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include "atlas/feature_stack.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "atlas/error.hpp"

namespace atlas {

FeatureStack::FeatureStack(std::vector<BandSpec> specs, std::vector<RasterLayer> bands,
                           RasterLayer land_mask, std::optional<ContinentBand> continent,
                           bool append_coordinates)
    : specs_(std::move(specs)),
      bands_(std::move(bands)),
      land_mask_(std::move(land_mask)),
      continent_(std::move(continent)),
      append_coordinates_(append_coordinates) {
  if (specs_.size() != bands_.size()) throw DimensionError("band specs and rasters differ in count");
  for (std::size_t b = 0; b < bands_.size(); ++b) {
    if (!bands_[b].grid().matches(grid()))
      throw DimensionError("band '" + specs_[b].name + "' is not on the land-mask grid");
    if (specs_[b].kind == BandKind::Categorical && specs_[b].categories.empty())
      throw ConfigError("categorical band '" + specs_[b].name + "' lists no categories");
    dim_ += specs_[b].kind == BandKind::Categorical ? specs_[b].categories.size() : 1;
  }
  if (continent_ && !continent_->layer.grid().matches(grid()))
    throw DimensionError("continent band is not on the land-mask grid");
  if (append_coordinates_) dim_ += 2;
}

std::vector<std::string> FeatureStack::feature_names() const {
  std::vector<std::string> names;
  for (const auto& s : specs_) {
    if (s.kind == BandKind::Continuous) names.push_back(s.name);
    else
      for (long long c : s.categories) names.push_back(s.name + "=" + std::to_string(c));
  }
  if (append_coordinates_) {
    names.emplace_back("lon");
    names.emplace_back("lat");
  }
  return names;
}

bool FeatureStack::is_land(std::size_t row, std::size_t col) const {
  const double v = land_mask_.at(row, col);
  return !land_mask_.is_nodata(v) && v != 0.0;
}

std::optional<std::string> FeatureStack::continent_at(std::size_t row, std::size_t col) const {
  if (!continent_) return std::nullopt;
  const double v = continent_->layer.at(row, col);
  if (continent_->layer.is_nodata(v)) return std::nullopt;
  const auto code = std::llround(v);
  if (auto it = continent_->labels.find(code); it != continent_->labels.end()) return it->second;
  return std::to_string(code);
}

bool FeatureStack::fill(std::size_t row, std::size_t col, double lon, double lat,
                        int patch_radius, std::span<double> out) const {
  if (out.size() != dim_) throw DimensionError("feature buffer does not match stack dimension");
  const auto nrows = static_cast<long long>(land_mask_.rows());
  const auto ncols = static_cast<long long>(land_mask_.cols());
  std::size_t k = 0;
  for (std::size_t b = 0; b < bands_.size(); ++b) {
    const auto& layer = bands_[b];
    const auto& spec = specs_[b];
    if (spec.kind == BandKind::Categorical) {
      const double v = layer.at(row, col);
      if (layer.is_nodata(v)) return false;
      const auto code = std::llround(v);
      for (long long c : spec.categories) out[k++] = c == code ? 1.0 : 0.0;
      continue;
    }
    if (patch_radius <= 0) {
      const double v = layer.at(row, col);
      if (layer.is_nodata(v)) return false;
      out[k++] = v;
      continue;
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (long long r = static_cast<long long>(row) - patch_radius;
         r <= static_cast<long long>(row) + patch_radius; ++r) {
      if (r < 0 || r >= nrows) continue;
      for (long long c = static_cast<long long>(col) - patch_radius;
           c <= static_cast<long long>(col) + patch_radius; ++c) {
        if (c < 0 || c >= ncols) continue;
        const double v = layer.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
        if (layer.is_nodata(v)) continue;
        sum += v;
        ++n;
      }
    }
    if (n == 0) return false;
    out[k++] = sum / static_cast<double>(n);
  }
  if (append_coordinates_) {
    out[k++] = lon;
    out[k++] = lat;
  }
  return true;
}

bool FeatureStack::features_at_cell(std::size_t row, std::size_t col, int patch_radius,
                                    std::span<double> out) const {
  return fill(row, col, grid().lon(col), grid().lat(row), patch_radius, out);
}

bool FeatureStack::features_at(double lon, double lat, int patch_radius,
                               std::span<double> out) const {
  const auto cell = locate(lon, lat);
  if (!cell) return false;
  return fill(cell->first, cell->second, lon, lat, patch_radius, out);
}

namespace {

std::string required_string(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw ConfigError(where + ": missing string field '" + key + "'");
  return j.at(key).get<std::string>();
}

}  // namespace

FeatureStack FeatureStack::load(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error("cannot open " + manifest.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(manifest.string() + ": " + e.what());
  }
  const auto base = manifest.parent_path();
  const std::string where = manifest.string();

  std::vector<BandSpec> specs;
  std::vector<RasterLayer> layers;
  if (!j.contains("bands") || !j.at("bands").is_array())
    throw ConfigError(where + ": missing 'bands' array");
  for (const auto& b : j.at("bands")) {
    BandSpec s;
    s.name = required_string(b, "name", where);
    const auto kind = b.value("kind", std::string("continuous"));
    if (kind == "continuous") s.kind = BandKind::Continuous;
    else if (kind == "categorical") s.kind = BandKind::Categorical;
    else throw ConfigError(where + ": band '" + s.name + "' has unknown kind '" + kind + "'");
    s.file = required_string(b, "file", where);
    s.group = b.value("group", std::string());
    if (b.contains("categories")) s.categories = b.at("categories").get<std::vector<long long>>();
    layers.push_back(read_ascii_grid(base / s.file, s.kind == BandKind::Categorical
                                                        ? ValueKind::Integer
                                                        : ValueKind::Real));
    specs.push_back(std::move(s));
  }
  auto mask = read_ascii_grid(base / required_string(j, "land_mask", where), ValueKind::Integer);

  std::optional<ContinentBand> continent;
  if (j.contains("continent")) {
    const auto& c = j.at("continent");
    ContinentBand band{read_ascii_grid(base / required_string(c, "file", where), ValueKind::Integer),
                       {}};
    if (c.contains("labels"))
      for (const auto& [code, label] : c.at("labels").items()) {
        char* end = nullptr;
        const long long k = std::strtoll(code.c_str(), &end, 10);
        if (end == code.c_str() || *end != '\0')
          throw ConfigError(where + ": continent label key '" + code + "' is not an integer");
        band.labels[k] = label.get<std::string>();
      }
    continent = std::move(band);
  }
  return FeatureStack(std::move(specs), std::move(layers), std::move(mask), std::move(continent),
                      j.value("append_coordinates", true));
}

}  // namespace atlas
