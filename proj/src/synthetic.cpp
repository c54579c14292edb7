// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include "atlas/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "atlas/error.hpp"

namespace atlas::synthetic {

LabeledSamples NicheWorld::sample(std::size_t n, std::mt19937_64& rng) const {
  LabeledSamples out(dims);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(species() - 1));
  std::normal_distribution<double> noise(0.0, niche_sd);
  std::vector<double> x(dims);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = pick(rng);
    for (std::size_t d = 0; d < dims; ++d) x[d] = centers[k][d] + noise(rng);
    out.add(x, SpeciesId{k});
  }
  return out;
}

NicheWorld make_niche_world(std::size_t species, std::size_t dims, double center_range,
                            double niche_sd, std::uint64_t seed) {
  if (species == 0 || dims == 0) throw RangeError("species", "world needs species and dimensions");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-center_range, center_range);
  NicheWorld w;
  w.dims = dims;
  w.niche_sd = niche_sd;
  w.centers.assign(species, std::vector<double>(dims));
  for (auto& c : w.centers)
    for (auto& v : c) v = u(rng);
  return w;
}

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

std::string species_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sp%03zu", k);
  return buf;
}

struct Fields {
  std::vector<double> phase, fu, fv;
};

}  // namespace

SpatialWorld make_spatial_world(const SpatialWorldOptions& o) {
  o.grid.validate();
  if (o.species == 0 || o.occurrences == 0) throw RangeError("species", "empty world");
  if (o.layout == Layout::DisjointHalves && o.species != 2)
    throw RangeError("species", "the disjoint layout has exactly two species");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SpatialWorld w;
  w.grid = o.grid;
  const std::size_t rows = o.grid.rows(), cols = o.grid.cols();
  const std::size_t n_bands = o.layout == Layout::DisjointHalves ? 1 : o.bands;
  const auto u_of = [&](std::size_t c) { return cols > 1 ? double(c) / double(cols - 1) : 0.0; };
  const auto v_of = [&](std::size_t r) {
    return rows > 1 ? double(rows - 1 - r) / double(rows - 1) : 0.0;
  };

  // Land: everything except a round lake.
  w.land_mask = RasterLayer(o.grid, ValueKind::Integer);
  w.continent = RasterLayer(o.grid, ValueKind::Integer);
  w.regions = RasterLayer(o.grid, ValueKind::Integer);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double u = u_of(c), v = v_of(r);
      const bool land = std::hypot(u - 0.7, v - 0.3) > 0.12;
      w.land_mask.at(r, c) = land ? 1 : 0;
      w.continent.at(r, c) = land ? (u < 0.5 ? 1 : 2) : kNodata;
      const auto rc = std::min(o.region_cols - 1, std::size_t(u * double(o.region_cols)));
      const auto rr = std::min(o.region_rows - 1, std::size_t(v * double(o.region_rows)));
      w.regions.at(r, c) = land ? double(1 + rr * o.region_cols + rc) : kNodata;
    }
  for (std::size_t i = 0; i < o.region_cols * o.region_rows; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "R%02zu", i + 1);
    w.catalog[std::int32_t(i + 1)] = RegionInfo{std::int32_t(i + 1), name, std::nullopt};
  }

  // Covariates: smooth periodic fields, or a single wavy gradient.
  Fields f;
  for (std::size_t b = 0; b < n_bands; ++b) {
    f.phase.push_back(unit(rng) * kTau);
    f.fu.push_back(0.5 + unit(rng));
    f.fv.push_back(0.5 + unit(rng));
  }
  for (std::size_t b = 0; b < n_bands; ++b) {
    RasterLayer band(o.grid, ValueKind::Real);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        const double u = u_of(c), v = v_of(r);
        double value = o.layout == Layout::DisjointHalves
                           ? u + 0.15 * std::sin(kTau * v)
                           : std::sin(kTau * f.fu[b] * u + f.phase[b]) * std::cos(kTau * f.fv[b] * v);
        if (w.land_mask.at(r, c) == 0) value = kNodata;
        // Round to what the text format keeps so written and in-memory worlds agree.
        band.at(r, c) = value == kNodata ? value : std::stod(format_cell(value, ValueKind::Real, kNodata));
      }
    w.band_names.push_back("bio" + std::to_string(b + 1));
    w.bands.push_back(std::move(band));
  }

  std::vector<std::pair<std::size_t, std::size_t>> land;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (w.land_mask.at(r, c) != 0) land.emplace_back(r, c);
  if (land.empty()) throw RangeError("grid", "world has no land");

  const auto band_vec = [&](std::size_t r, std::size_t c) {
    std::vector<double> x(n_bands);
    for (std::size_t b = 0; b < n_bands; ++b) x[b] = w.bands[b].at(r, c);
    return x;
  };
  const double mid = 0.5;  // DisjointHalves split value of bio1
  const auto owner = [&](std::size_t r, std::size_t c) -> std::size_t {
    return w.bands[0].at(r, c) < mid ? 0 : 1;
  };

  // Niche centres at random land cells; abundance falls off geometrically.
  std::vector<std::vector<double>> centers;
  std::vector<double> abundance;
  for (std::size_t k = 0; k < o.species; ++k) {
    const auto& [r, c] = land[std::size_t(unit(rng) * double(land.size())) % land.size()];
    centers.push_back(band_vec(r, c));
    abundance.push_back(std::pow(0.96, double(k)));
  }
  std::discrete_distribution<std::size_t> pick_species(abundance.begin(), abundance.end());
  std::uniform_int_distribution<std::size_t> pick_cell(0, land.size() - 1);
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);

  const auto region_name = [&](std::size_t r, std::size_t c) {
    return w.catalog.at(std::int32_t(w.regions.at(r, c))).name;
  };
  for (std::size_t i = 0; i < o.occurrences; ++i) {
    const std::size_t k = o.layout == Layout::DisjointHalves ? i % 2 : pick_species(rng);
    for (;;) {
      const auto [r, c] = land[pick_cell(rng)];
      bool accept;
      if (o.layout == Layout::DisjointHalves) {
        accept = owner(r, c) == k;
      } else {
        const auto x = band_vec(r, c);
        double d2 = 0.0;
        for (std::size_t b = 0; b < n_bands; ++b) d2 += (x[b] - centers[k][b]) * (x[b] - centers[k][b]);
        accept = unit(rng) < std::exp(-d2 / (2.0 * o.niche_sd * o.niche_sd));
      }
      if (!accept) continue;
      const double lon = o.grid.lon(c) + jitter(rng) * o.grid.step * 0.999;
      const double lat = o.grid.lat(r) + jitter(rng) * o.grid.step * 0.999;
      w.occurrences.add(species_name(k), lon, lat, region_name(r, c),
                        w.continent.at(r, c) == 1 ? "WEST" : "EAST");
      break;
    }
  }

  // Statuses: mostly assessed, some only predicted, a few missing.
  for (std::size_t k = 0; k < o.species; ++k) {
    const auto name = species_name(k);
    if (o.layout == Layout::DisjointHalves) {
      w.statuses.add(name, k == 0 ? Status::LC : Status::CR, StatusSource::Assessed);
      continue;
    }
    const Status s = status_from_rank(int(unit(rng) * 5.0) % 5);
    const double kind = unit(rng);
    if (kind < 0.7) {
      w.statuses.add(name, s, StatusSource::Assessed);
      if (kind < 0.1) w.statuses.add(name, status_from_rank((rank(s) + 1) % 5), StatusSource::Predicted);
    } else if (kind < 0.92) {
      w.statuses.add(name, s, StatusSource::Predicted);
    }
  }

  if (o.layout == Layout::DisjointHalves) {
    w.planted_io = RasterLayer(o.grid, ValueKind::StatusCode);
    for (const auto& [r, c] : land)
      w.planted_io.at(r, c) = owner(r, c) == 0 ? rank(Status::LC) : rank(Status::CR);
  }
  return w;
}

void write_spatial_world(const SpatialWorld& w, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["bands"] = nlohmann::json::array();
  for (std::size_t b = 0; b < w.bands.size(); ++b) {
    const std::string file = w.band_names[b] + ".asc";
    write_ascii_grid(dir / file, w.bands[b]);
    manifest["bands"].push_back(
        {{"name", w.band_names[b]}, {"kind", "continuous"}, {"file", file}, {"group", "climate"}});
  }
  write_ascii_grid(dir / "land_mask.asc", w.land_mask);
  write_ascii_grid(dir / "continent.asc", w.continent);
  write_ascii_grid(dir / "regions.asc", w.regions);
  manifest["land_mask"] = "land_mask.asc";
  manifest["continent"] = {{"file", "continent.asc"}, {"labels", {{"1", "WEST"}, {"2", "EAST"}}}};
  manifest["append_coordinates"] = true;
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';

  std::ofstream cat(dir / "regions.csv");
  cat << "region_id,name,area_km2\n";
  for (const auto& [id, info] : w.catalog) cat << id << ',' << info.name << ",\n";

  std::ofstream occ(dir / "occurrences.csv");
  write_occurrences(occ, w.occurrences);

  std::ofstream st(dir / "statuses.csv");
  st << "species,status,source\n";
  for (std::size_t k = 0; k < w.occurrences.species.size(); ++k) {
    const auto& name = w.occurrences.species.name(SpeciesId{std::uint32_t(k)});
    if (const auto* e = w.statuses.find(name)) {
      if (e->assessed) st << name << ',' << to_string(*e->assessed) << ",assessed\n";
      if (e->predicted) st << name << ',' << to_string(*e->predicted) << ",predicted\n";
    }
  }
  if (!occ || !st || !cat) throw Error("failed writing synthetic world to " + dir.string());
}

}  // namespace atlas::synthetic
