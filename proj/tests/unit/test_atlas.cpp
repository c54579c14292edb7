// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "atlas/assemblage_post.hpp"
#include "atlas/conformal.hpp"
#include "atlas/error.hpp"
#include "atlas/feature_stack.hpp"
#include "atlas/grid.hpp"
#include "atlas/indicators.hpp"
#include "atlas/map_pipeline.hpp"
#include "atlas/raster.hpp"
#include "atlas/regions.hpp"
#include "atlas/synthetic.hpp"

using namespace atlas;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("atlas_test_atlas_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

FeatureStack stack_of(const synthetic::SpatialWorld& w) {
  std::vector<BandSpec> specs;
  for (const auto& n : w.band_names) specs.push_back({n, BandKind::Continuous, n + ".asc", "climate", {}});
  return FeatureStack(specs, w.bands, w.land_mask,
                      ContinentBand{w.continent, {{1, "WEST"}, {2, "EAST"}}}, true);
}

SoftmaxModel random_model(std::size_t d, std::size_t c, std::uint64_t seed) {
  SoftmaxModel m(d, c);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 2.0);
  for (auto& w : m.weights()) w = n(rng);
  for (auto& b : m.bias()) b = n(rng);
  return m;
}

struct Fixture {
  synthetic::SpatialWorld world;
  FeatureStack stack;
  SoftmaxModel model;
  ContinentPrior prior;
  StatusIndex statuses;

  explicit Fixture(synthetic::SpatialWorldOptions o = make_options())
      : world(synthetic::make_spatial_world(o)),
        stack(stack_of(world)),
        model(random_model(stack.dim(), world.occurrences.n_species(), 5)),
        prior(build_continent_prior(world.occurrences)),
        statuses(world.statuses.resolve(world.occurrences.species)) {}

  static synthetic::SpatialWorldOptions make_options() {
    synthetic::SpatialWorldOptions o;
    o.grid = {0.0, 0.2, 0.0, 0.2, 0.01};
    o.species = 8;
    o.occurrences = 400;
    o.niche_sd = 0.6;
    o.seed = 3;
    return o;
  }

  MapInputs inputs(double lambda = 0.08) const {
    MapInputs in;
    in.model = &model;
    in.stack = &stack;
    in.lambda = lambda;
    in.prior = &prior;
    in.statuses = &statuses;
    in.grid = stack.grid();
    in.indicators = all_indicators(true);
    return in;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

// --- grid ---------------------------------------------------------------------

TEST_CASE("grid point counts use inclusive endpoints") {
  const GridSpec g{0, 1, 0, 1, 1.0 / 120};
  CHECK(g.cols() == 121);
  CHECK(g.rows() == 121);
  RasterLayer land(g, ValueKind::Integer, std::vector<double>(g.cell_count(), 1.0));
  CHECK(build_grid(g, land).points.size() == 14641);
  RasterLayer water(g, ValueKind::Integer, std::vector<double>(g.cell_count(), 0.0));
  const auto none = build_grid(g, water);
  CHECK(none.points.empty());
  CHECK_FALSE(none.warnings.empty());

  const GridSpec global;
  CHECK(global.cols() == 43201);
  CHECK(global.rows() == 21601);
  CHECK(global.without_antimeridian().cols() == 43200);
  CHECK_THROWS_AS(GridSpec({1, 0, 0, 1, 0.1}).validate(), RangeError);
}

TEST_CASE("grid geometry") {
  const GridSpec g{10, 12, -1, 1, 0.5};
  CHECK(g.lon(0) == 10);
  CHECK(g.lon(4) == 12);
  CHECK(g.lat(0) == 1);   // north first
  CHECK(g.lat(4) == -1);
  const auto cell = g.locate(10.6, -0.1);
  REQUIRE(cell.has_value());
  CHECK(cell->first == 2);
  CHECK(cell->second == 1);
  CHECK_FALSE(g.locate(9.0, 0).has_value());

  const GridSpec other{0, 5, 0, 5, 1};
  RasterLayer mask(other, ValueKind::Integer, std::vector<double>(36, 1.0));
  const auto disjoint = build_grid(g, mask);
  CHECK(disjoint.points.empty());
  CHECK_FALSE(disjoint.warnings.empty());
}

// --- rasters --------------------------------------------------------------------

TEST_CASE("ascii grid format") {
  const GridSpec g{0, 1, 0, 0.5, 0.5};  // 3 cols x 2 rows
  RasterLayer real(g, ValueKind::Real, {0.123456789, kNodata, 1e-7, 2, 3.5, -1});
  std::ostringstream out;
  write_ascii_grid(out, real);
  CHECK(out.str() ==
        "ncols 3\nnrows 2\nxllcorner -0.25\nyllcorner -0.25\ncellsize 0.5\nNODATA_value -9999\n"
        "0.123457 -9999 1e-07\n2 3.5 -1\n");

  RasterLayer codes(g, ValueKind::StatusCode, {0, 4, kNodata, 2, 3, 1});
  std::ostringstream c;
  write_ascii_grid(c, codes);
  std::istringstream in(c.str());
  const auto back = read_ascii_grid(in, ValueKind::StatusCode);
  CHECK(back == codes);
  CHECK(back.grid().lon0 == doctest::Approx(0.0));
}

TEST_CASE("ascii grid reader") {
  std::istringstream centered(
      "NCOLS 2\nNROWS 2\nXLLCENTER 5\nYLLCENTER 6\nCELLSIZE 1\nnodata_value -1\n1 -1\n3 4\n");
  const auto r = read_ascii_grid(centered, ValueKind::Real);
  CHECK(r.grid().lon0 == 5);
  CHECK(r.grid().lat1 == 7);
  CHECK(r.is_nodata(r.at(0, 1)));
  CHECK(r.at(1, 0) == 3);

  std::istringstream truncated("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 3\n");
  CHECK_THROWS_AS(read_ascii_grid(truncated, ValueKind::Real), ParseError);
  std::istringstream bad("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2 x 4\n");
  CHECK_THROWS_AS(read_ascii_grid(bad, ValueKind::Real), ParseError);
  std::istringstream tiny("ncols 1\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1\n");
  CHECK_THROWS_AS(read_ascii_grid(tiny, ValueKind::Real), ParseError);
}

TEST_CASE("streaming writer checks row counts") {
  const GridSpec g{0, 1, 0, 1, 1};
  std::ostringstream out;
  AsciiGridWriter w(out, g, ValueKind::Real);
  w.write_row(std::vector<double>{1, 2});
  CHECK_THROWS_AS(w.finish(), Error);
  CHECK_THROWS_AS(w.write_row(std::vector<double>{1}), DimensionError);
  w.write_row(std::vector<double>{3, 4});
  CHECK_NOTHROW(w.finish());
}

TEST_CASE("crop") {
  const GridSpec g{0, 3, 0, 3, 1};
  std::vector<double> v(16);
  for (std::size_t i = 0; i < 16; ++i) v[i] = double(i);
  const RasterLayer full(g, ValueKind::Real, v);
  const auto sub = crop(full, GridSpec{1, 2, 1, 2, 1});
  CHECK(sub.rows() == 2);
  CHECK(sub.at(0, 0) == full.at(1, 1));
  CHECK(sub.at(1, 1) == full.at(2, 2));
  CHECK_THROWS_AS(crop(full, GridSpec{2, 5, 0, 1, 1}), DimensionError);
}

// --- regions and stacks -----------------------------------------------------------

TEST_CASE("region catalog and raster") {
  std::istringstream cat("region_id,name,area_km2\n1,MDG,587041\n2,Sumatra,\n");
  const auto c = read_region_catalog(cat);
  CHECK(c.at(1).area_km2 == 587041.0);
  CHECK_FALSE(c.at(2).area_km2.has_value());
  const GridSpec g{0, 1, 0, 1, 1};
  const RegionRaster r(RasterLayer(g, ValueKind::Integer, {1, 2, 7, kNodata}), c);
  CHECK(r.at(0, 0) == 1);
  CHECK_FALSE(r.at(1, 1).has_value());
  CHECK(r.info(7).name == "7");
}

TEST_CASE("cell areas sum to the sphere") {
  const GridSpec g{-180, 179, -90, 90, 1};
  double total = 0;
  for (std::size_t r = 0; r < g.rows(); ++r) total += cell_area_km2(g.lat(r), 1.0) * double(g.cols());
  const double sphere = 4 * std::numbers::pi * 6371.0088 * 6371.0088;
  CHECK(total == doctest::Approx(sphere).epsilon(1e-9));
}

TEST_CASE("feature stack from a manifest") {
  const auto dir = scratch("stack");
  const auto world = synthetic::make_spatial_world(Fixture::make_options());
  synthetic::write_spatial_world(world, dir);
  const auto stack = FeatureStack::load(dir / "manifest.json");
  CHECK(stack.dim() == world.bands.size() + 2);
  CHECK(stack.feature_names().back() == "lat");
  CHECK(stack.has_continent());
  CHECK(stack.continent_at(0, 0) == "WEST");
  std::vector<double> x(stack.dim());
  REQUIRE(stack.features_at_cell(3, 4, 0, x));
  CHECK(x[0] == world.bands[0].at(3, 4));
  CHECK(x[stack.dim() - 2] == stack.grid().lon(4));
  REQUIRE(stack.features_at(0.0412, 0.1687, 0, x));
  CHECK(x[stack.dim() - 2] == 0.0412);

  std::ofstream(dir / "bad.json") << R"({"bands":[{"name":"x","kind":"fuzzy","file":"bio1.asc"}],"land_mask":"land_mask.asc"})";
  CHECK_THROWS_AS(FeatureStack::load(dir / "bad.json"), ConfigError);
}

TEST_CASE("categorical bands are one-hot") {
  const GridSpec g{0, 1, 0, 1, 1};
  RasterLayer cat(g, ValueKind::Integer, {3, 5, kNodata, 3});
  RasterLayer land(g, ValueKind::Integer, {1, 1, 1, 1});
  FeatureStack s({{"soil", BandKind::Categorical, "", "", {3, 5, 9}}}, {cat}, land, std::nullopt, false);
  CHECK(s.dim() == 3);
  std::vector<double> x(3);
  REQUIRE(s.features_at_cell(0, 1, 0, x));
  CHECK(x == std::vector<double>{0, 1, 0});
  CHECK_FALSE(s.features_at_cell(1, 0, 0, x));
}

// --- map pipeline ---------------------------------------------------------------

TEST_CASE("indicator names") {
  CHECK(parse_indicator("IO").name() == "I_O");
  CHECK(parse_indicator("THREAT_IUCN").name() == "I_THREAT_IUCN");
  CHECK(parse_indicator("I_H").kind == IndicatorKind::Shannon);
  CHECK(parse_indicator("CR").value_kind() == ValueKind::Real);
  CHECK(parse_indicator("IO_IUCN").value_kind() == ValueKind::StatusCode);
  CHECK_THROWS_AS(parse_indicator("I_X"), ConfigError);
  CHECK(all_indicators(true).size() == 16);
}

TEST_CASE("map equals the stages composed by hand") {
  const Fixture f;
  const auto in = f.inputs();
  MapTally tally;
  const auto layers = batch_predict_map(in, {}, &tally);
  REQUIRE(layers.size() == in.indicators.size());
  const auto assessed = f.statuses.assessed_only();
  std::size_t land = 0, checked_values = 0;
  std::vector<double> x(f.stack.dim());
  for (std::size_t r = 0; r < in.grid.rows(); ++r)
    for (std::size_t c = 0; c < in.grid.cols(); ++c) {
      if (!f.stack.is_land(r, c)) {
        for (const auto& l : layers) CHECK(l.at(r, c) == kNodata);
        continue;
      }
      ++land;
      REQUIRE(f.stack.features_at_cell(r, c, 0, x));
      const auto eta = f.model.predict_proba(x);
      const auto set = predict_set(eta, in.lambda);
      const auto filtered = filter_by_prior(set, *f.prior.continent_id(*f.stack.continent_at(r, c)), f.prior);
      const auto a = renormalize(filtered);
      for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& req = in.indicators[l];
        const auto& idx = req.assessed_only ? assessed : f.statuses;
        IndicatorValue v = IndicatorValue::nodata();
        if (a) {
          if (req.kind == IndicatorKind::MostCritical) {
            v = indicator_io(*a, idx);
          } else if (req.kind == IndicatorKind::Shannon) {
            if (!req.assessed_only) v = shannon(*a);
            else if (auto ra = restrict_to_status_bearing(*a, idx)) v = shannon(*ra);
          } else if (auto ra = restrict_to_status_bearing(*a, idx)) {
            const auto q = req.kind == IndicatorKind::Threat
                               ? StatusQuery::Threat
                               : static_cast<StatusQuery>(static_cast<int>(req.kind) - 1);
            v = indicator_ic(*ra, idx, q);
          }
        }
        const double expect = v.is_nodata() ? kNodata : v.is_status() ? rank(v.status()) : v.real();
        CHECK(layers[l].at(r, c) == expect);
        checked_values += !v.is_nodata();
      }
    }
  CHECK(tally.land_cells == land);
  CHECK(tally.cells == in.grid.cell_count());
  CHECK(checked_values > 0);
}

TEST_CASE("map output does not depend on batching or workers") {
  const Fixture f;
  const auto in = f.inputs();
  const auto reference = batch_predict_map(in, {512, 50000, 1, 0});
  for (std::size_t batch : {1u, 7u, 64u})
    for (unsigned workers : {1u, 3u, 4u})
      for (std::size_t buffer : {1u, 50u, 50000u}) {
        CAPTURE(batch);
        CAPTURE(workers);
        CAPTURE(buffer);
        MapTally t;
        CHECK(batch_predict_map(in, {batch, buffer, workers, 0}, &t) == reference);
      }
}

TEST_CASE("threat layer is the sum of its parts") {
  const Fixture f;
  auto in = f.inputs();
  in.indicators = {parse_indicator("VU"), parse_indicator("EN"), parse_indicator("CR"),
                   parse_indicator("THREAT")};
  const auto l = batch_predict_map(in, {});
  std::size_t n = 0;
  for (std::size_t i = 0; i < l[0].values().size(); ++i) {
    if (l[3].values()[i] == kNodata) continue;
    ++n;
    CHECK(std::abs(l[0].values()[i] + l[1].values()[i] + l[2].values()[i] - l[3].values()[i]) <= 1e-9);
  }
  CHECK(n > 0);
}

TEST_CASE("sub-bbox run equals the crop of the full run") {
  const Fixture f;
  auto in = f.inputs();
  const auto full = batch_predict_map(in, {});
  for (int radius : {0, 1}) {
    in.grid = GridSpec{0.05, 0.12, 0.03, 0.17, 0.01};
    const auto sub = batch_predict_map(in, {16, 30, 2, radius});
    in.grid = f.stack.grid();
    const auto whole = batch_predict_map(in, {16, 30, 2, radius});
    for (std::size_t l = 0; l < sub.size(); ++l) CHECK(sub[l] == crop(whole[l], sub[l].grid()));
    if (radius == 0)
      for (std::size_t l = 0; l < sub.size(); ++l) CHECK(whole[l] == full[l]);
  }
}

TEST_CASE("nodata covariates and unknown continents become nodata cells") {
  Fixture f;
  // Find a land cell and punch holes into one band and the continent band.
  std::size_t r0 = 0, c0 = 0;
  while (!f.stack.is_land(r0, c0)) ++c0;
  f.world.bands[1].at(r0, c0) = kNodata;
  f.world.continent.at(r0, c0 + 1) = kNodata;
  f.stack = stack_of(f.world);
  MapTally tally;
  const auto l = batch_predict_map(f.inputs(0.0), {}, &tally);
  CHECK(tally.nodata_feature_cells == 1);
  CHECK(tally.unknown_continent_cells == 1);
  CHECK(l[0].at(r0, c0) == kNodata);
  CHECK(l[0].at(r0, c0 + 1) == kNodata);
  CHECK(l[0].at(r0, c0 + 2) != kNodata);
}

TEST_CASE("empty sets render as nodata") {
  const Fixture f;
  MapTally tally;
  const auto l = batch_predict_map(f.inputs(1.0), {}, &tally);
  CHECK(tally.empty_before_filter == tally.land_cells);
  for (const auto& layer : l)
    for (double v : layer.values()) CHECK(v == kNodata);
}

TEST_CASE("preflight rejects mismatches before writing") {
  const Fixture f;
  const auto dir = scratch("preflight");
  auto in = f.inputs();
  const auto wrong = random_model(f.stack.dim() + 1, f.world.occurrences.n_species(), 1);
  in.model = &wrong;
  AsciiDirectorySink sink(dir / "maps");
  CHECK_THROWS_AS(run_map(in, {}, sink), DimensionError);
  CHECK_FALSE(fs::exists(dir / "maps"));

  in = f.inputs();
  StatusIndex short_index;
  in.statuses = &short_index;
  CHECK_THROWS_AS(preflight(in, {}), DimensionError);
  in = f.inputs();
  CHECK_THROWS_AS(preflight(in, {0, 1, 1, 0}), ConfigError);
}

TEST_CASE("directory sink writes the same bytes as the in-memory layers") {
  const Fixture f;
  const auto dir = scratch("sink");
  auto in = f.inputs();
  AsciiDirectorySink sink(dir);
  run_map(in, {13, 40, 2, 0}, sink);
  const auto layers = batch_predict_map(in, {});
  REQUIRE(sink.written().size() == layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    std::ostringstream expect;
    write_ascii_grid(expect, layers[l]);
    CHECK(slurp(dir / (in.indicators[l].name() + ".asc")) == expect.str());
  }
  for (const auto& e : fs::directory_iterator(dir)) CHECK(e.path().extension() == ".asc");
}

TEST_CASE("disjoint niches give the planted status partition") {
  auto o = Fixture::make_options();
  o.layout = synthetic::Layout::DisjointHalves;
  o.species = 2;
  const auto w = synthetic::make_spatial_world(o);
  const auto stack = stack_of(w);
  // A hand-set model: species 1 wins when the band exceeds 0.5.
  SoftmaxModel m(stack.dim(), 2);
  m.weights()[1] = 200.0;
  m.bias()[1] = -100.0;
  const auto prior = build_continent_prior(w.occurrences);
  const auto st = w.statuses.resolve(w.occurrences.species);
  MapInputs in;
  in.model = &m;
  in.stack = &stack;
  in.lambda = 0.5;
  in.prior = &prior;
  in.statuses = &st;
  in.grid = stack.grid();
  in.indicators = {parse_indicator("IO")};
  const auto io = batch_predict_map(in, {});
  // Species ids follow first appearance in the occurrence file.
  const bool swapped = w.occurrences.species.name(SpeciesId{0}) != "sp000";
  std::size_t land = 0, agree = 0;
  for (std::size_t i = 0; i < io[0].values().size(); ++i) {
    if (w.planted_io.values()[i] == kNodata) continue;
    ++land;
    const double planted = w.planted_io.values()[i];
    agree += io[0].values()[i] == (swapped ? 4.0 - planted : planted);
  }
  CHECK(land > 0);
  CHECK(agree >= land * 99 / 100);
}
