// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Writes a small synthetic world plus a ready-to-run config.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "atlas/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic atlas world", "atlas_fixture"};
  std::string dir;
  std::string layout = "niches";
  atlas::synthetic::SpatialWorldOptions opts;
  app.add_option("dir", dir, "Output directory")->required();
  app.add_option("--layout", layout, "niches or disjoint")->check(CLI::IsMember({"niches", "disjoint"}));
  app.add_option("--species", opts.species, "Number of species");
  app.add_option("--occurrences", opts.occurrences, "Number of occurrences");
  app.add_option("--seed", opts.seed, "World seed");
  CLI11_PARSE(app, argc, argv);

  if (layout == "disjoint") {
    opts.layout = atlas::synthetic::Layout::DisjointHalves;
    opts.species = 2;
  }
  try {
    const auto world = atlas::synthetic::make_spatial_world(opts);
    atlas::synthetic::write_spatial_world(world, dir);
    nlohmann::json cfg = {
        {"paths",
         {{"occurrences", "occurrences.csv"},
          {"statuses", "statuses.csv"},
          {"stack", "manifest.json"},
          {"regions", "regions.asc"},
          {"region_catalog", "regions.csv"},
          {"out", "out"}}},
        {"split", {{"block_size", 0.05}, {"seed", 7}}},
        {"train", {{"epochs", 20}, {"learning_rate", 0.1}, {"decay_epochs", {14, 18}}}},
        {"zonal", {{"min_area_km2", 0}}},
    };
    std::ofstream(std::filesystem::path(dir) / "config.json") << cfg.dump(2) << '\n';
  } catch (const std::exception& e) {
    std::cerr << "atlas_fixture: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
