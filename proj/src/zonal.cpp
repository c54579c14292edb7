// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include "atlas/zonal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "atlas/error.hpp"
#include "atlas/text.hpp"

namespace atlas {

namespace {

void require_shared_grid(const RasterLayer& layer, const RegionRaster& regions) {
  if (!layer.grid().matches(regions.grid()) || layer.rows() != regions.layer().rows() ||
      layer.cols() != regions.layer().cols())
    throw DimensionError("raster and region grids differ");
}

/// Region ids passing the area threshold; the rest produce a warning.
std::map<std::int32_t, double> eligible_regions(const RegionRaster& regions,
                                                const ZonalOptions& options,
                                                std::vector<std::string>& warnings) {
  auto areas = region_areas_km2(regions);
  for (auto it = areas.begin(); it != areas.end();) {
    if (it->second < options.min_area_km2) {
      warnings.push_back("region '" + regions.info(it->first).name + "' below " +
                         text::format_significant(options.min_area_km2, 6) + " km2, excluded");
      it = areas.erase(it);
    } else {
      ++it;
    }
  }
  return areas;
}

}  // namespace

std::map<std::int32_t, double> region_areas_km2(const RegionRaster& regions) {
  std::map<std::int32_t, double> measured;
  const auto& grid = regions.grid();
  for (std::size_t r = 0; r < regions.layer().rows(); ++r) {
    const double a = cell_area_km2(grid.lat(r), grid.step);
    for (std::size_t c = 0; c < regions.layer().cols(); ++c)
      if (const auto id = regions.at(r, c)) measured[*id] += a;
  }
  std::map<std::int32_t, double> out;
  for (const auto& [id, info] : regions.catalog()) {
    if (info.area_km2) out[id] = *info.area_km2;
    else if (auto it = measured.find(id); it != measured.end()) out[id] = it->second;
  }
  return out;
}

AreaShares zonal_area_pct_all(const RasterLayer& io, const RegionRaster& regions,
                              const ZonalOptions& options) {
  require_shared_grid(io, regions);
  AreaShares out;
  const auto eligible = eligible_regions(regions, options, out.warnings);

  std::map<std::int32_t, std::array<std::size_t, 5>> counts;
  for (const auto& [id, area] : eligible) counts[id] = {};
  for (std::size_t r = 0; r < io.rows(); ++r) {
    for (std::size_t c = 0; c < io.cols(); ++c) {
      const auto id = regions.at(r, c);
      if (!id) continue;
      const auto it = counts.find(*id);
      const double v = io.at(r, c);
      if (it == counts.end() || io.is_nodata(v)) continue;
      ++it->second[static_cast<std::size_t>(rank(status_from_rank(static_cast<int>(v))))];
    }
  }
  for (const auto& [id, k] : counts) {
    const std::size_t valid = std::accumulate(k.begin(), k.end(), std::size_t{0});
    const auto& name = regions.info(id).name;
    if (valid == 0) {
      out.warnings.push_back("region '" + name + "' has no valid cells, omitted");
      continue;
    }
    std::array<double, 5> pct{};
    for (std::size_t s = 0; s < 5; ++s)
      pct[s] = 100.0 * static_cast<double>(k[s]) / static_cast<double>(valid);
    out.by_region[name] = pct;
  }
  return out;
}

ZonalResult zonal_area_pct(const RasterLayer& io, const RegionRaster& regions, Status c,
                           const ZonalOptions& options) {
  auto all = zonal_area_pct_all(io, regions, options);
  ZonalResult out;
  out.warnings = std::move(all.warnings);
  for (const auto& [name, pct] : all.by_region) out.values[name] = pct[rank(c)];
  return out;
}

ZonalResult zonal_mean(const RasterLayer& layer, const RegionRaster& regions,
                       const ZonalOptions& options) {
  require_shared_grid(layer, regions);
  ZonalResult out;
  const auto eligible = eligible_regions(regions, options, out.warnings);

  struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
  };
  std::map<std::int32_t, Acc> acc;
  for (const auto& [id, area] : eligible) acc[id] = {};
  for (std::size_t r = 0; r < layer.rows(); ++r) {
    for (std::size_t c = 0; c < layer.cols(); ++c) {
      const auto id = regions.at(r, c);
      if (!id) continue;
      const auto it = acc.find(*id);
      const double v = layer.at(r, c);
      if (it == acc.end() || layer.is_nodata(v)) continue;
      it->second.sum += v;
      ++it->second.n;
    }
  }
  for (const auto& [id, a] : acc) {
    const auto& name = regions.info(id).name;
    if (a.n == 0) {
      out.warnings.push_back("region '" + name + "' has no valid cells, omitted");
      continue;
    }
    out.values[name] = a.sum / static_cast<double>(a.n);
  }
  return out;
}

std::vector<RankedRegion> rank_regions(const std::map<std::string, double>& stat, int k,
                                       RankOrder order) {
  if (k <= 0) throw RangeError("k", "k must be positive");
  std::vector<RankedRegion> all;
  all.reserve(stat.size());
  for (const auto& [name, v] : stat) all.push_back({name, v, text::format_fixed(v, 2)});
  std::stable_sort(all.begin(), all.end(), [order](const RankedRegion& a, const RankedRegion& b) {
    return order == RankOrder::Descending ? a.value > b.value : a.value < b.value;
  });
  if (all.size() > static_cast<std::size_t>(k)) all.resize(static_cast<std::size_t>(k));
  return all;
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return sab / std::sqrt(saa * sbb);
}

constexpr std::size_t kExactLimit = 10;
constexpr double kPermutationTolerance = 1e-12;

}  // namespace

SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw DimensionError("spearman: inputs differ in length (" + std::to_string(x.size()) +
                         " vs " + std::to_string(y.size()) + ")");
  if (x.size() < 3) throw DimensionError("spearman needs at least 3 pairs");
  for (auto v : {x, y}) {
    if (std::any_of(v.begin(), v.end(), [](double d) { return !std::isfinite(d); }))
      throw RangeError("spearman", "non-finite input");
    if (std::all_of(v.begin(), v.end(), [&](double d) { return d == v.front(); }))
      throw RangeError("spearman", "constant input, correlation undefined");
  }
  const auto rx = average_ranks(x);
  auto ry = average_ranks(y);

  SpearmanResult out;
  out.n = x.size();
  out.rho = std::clamp(pearson(rx, ry), -1.0, 1.0);

  if (out.n <= kExactLimit) {
    out.exact = true;
    std::sort(ry.begin(), ry.end());
    const double threshold = std::abs(out.rho) - kPermutationTolerance;
    std::size_t hits = 0, total = 0;
    do {
      ++total;
      if (std::abs(pearson(rx, ry)) >= threshold) ++hits;
    } while (std::next_permutation(ry.begin(), ry.end()));
    out.p_value = static_cast<double>(hits) / static_cast<double>(total);
  } else {
    const double df = static_cast<double>(out.n) - 2.0;
    const double denom = 1.0 - out.rho * out.rho;
    if (denom <= 0.0) {
      out.p_value = 0.0;
    } else {
      const double t = std::abs(out.rho) * std::sqrt(df / denom);
      const boost::math::students_t dist(df);
      out.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
    }
  }
  return out;
}

}  // namespace atlas
