// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Generative test worlds with known structure.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "atlas/domain.hpp"
#include "atlas/grid.hpp"
#include "atlas/raster.hpp"
#include "atlas/regions.hpp"
#include "atlas/softmax_model.hpp"

namespace atlas::synthetic {

/// Species with isotropic Gaussian niches in covariate space; labels are
/// drawn uniformly and features from the label's niche.
struct NicheWorld {
  std::size_t dims = 4;
  double niche_sd = 1.0;
  std::vector<std::vector<double>> centers;

  std::size_t species() const noexcept { return centers.size(); }
  LabeledSamples sample(std::size_t n, std::mt19937_64& rng) const;
};

NicheWorld make_niche_world(std::size_t species, std::size_t dims, double center_range,
                            double niche_sd, std::uint64_t seed);

enum class Layout {
  GaussianNiches,  // many species, overlapping niches over smooth covariate fields
  DisjointHalves,  // two species splitting one covariate at its midpoint
};

struct SpatialWorldOptions {
  Layout layout = Layout::GaussianNiches;
  GridSpec grid{0.0, 1.0, 0.0, 1.0, 0.01};
  std::size_t species = 50;
  std::size_t bands = 4;
  std::size_t occurrences = 5000;
  std::size_t region_cols = 2;
  std::size_t region_rows = 2;
  double niche_sd = 0.35;
  std::uint64_t seed = 1;
};

struct SpatialWorld {
  GridSpec grid;
  std::vector<std::string> band_names;
  std::vector<RasterLayer> bands;
  RasterLayer land_mask;
  RasterLayer continent;  // 1 = "WEST", 2 = "EAST"
  RasterLayer regions;
  RegionCatalog catalog;
  OccurrenceDataset occurrences;
  StatusTable statuses;
  /// DisjointHalves only: status rank of the species owning each land cell.
  RasterLayer planted_io;
};

SpatialWorld make_spatial_world(const SpatialWorldOptions& options);

/// Writes bands, mask, continent and region rasters, the region catalog,
/// occurrences, statuses and `manifest.json` into `dir`.
void write_spatial_world(const SpatialWorld& world, const std::filesystem::path& dir);

}  // namespace atlas::synthetic
