// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include "atlas/spatial_split.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>

#include "atlas/error.hpp"
#include "atlas/text.hpp"

namespace atlas {

std::string_view to_string(Split s) noexcept {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "?";
}

std::size_t SplitAssignment::count(Split s) const {
  return static_cast<std::size_t>(
      std::count_if(blocks.begin(), blocks.end(), [s](const auto& kv) { return kv.second == s; }));
}

std::vector<BlockId> assign_blocks(const OccurrenceDataset& data, double block_size) {
  if (!(block_size > 0.0)) throw RangeError("block_size", "block size must be > 0");
  std::vector<BlockId> out;
  out.reserve(data.size());
  for (const auto& o : data.rows)
    out.push_back(BlockId{static_cast<std::int64_t>(std::floor(o.lon / block_size)),
                          static_cast<std::int64_t>(std::floor(o.lat / block_size))});
  return out;
}

std::map<BlockId, std::uint32_t> block_strata(const OccurrenceDataset& data,
                                              std::span<const BlockId> occurrence_blocks) {
  if (occurrence_blocks.size() != data.size())
    throw DimensionError("block list does not match occurrence count");
  std::map<BlockId, std::map<std::uint32_t, std::size_t>> tallies;
  for (std::size_t i = 0; i < data.size(); ++i) ++tallies[occurrence_blocks[i]][data.rows[i].region];

  std::map<BlockId, std::uint32_t> strata;
  for (const auto& [block, counts] : tallies) {
    std::uint32_t best = counts.begin()->first;
    std::size_t best_count = 0;
    for (const auto& [region, n] : counts) {
      const bool better =
          n > best_count ||
          (n == best_count && data.regions.name(region) < data.regions.name(best));
      if (better) {
        best = region;
        best_count = n;
      }
    }
    strata.emplace(block, best);
  }
  return strata;
}

namespace {

void derive_occurrences(SplitAssignment& split, std::span<const BlockId> occurrence_blocks) {
  split.occurrences.resize(occurrence_blocks.size());
  for (std::size_t i = 0; i < occurrence_blocks.size(); ++i)
    split.occurrences[i] = split.blocks.at(occurrence_blocks[i]);
}

}  // namespace

SplitAssignment split_blocks(const OccurrenceDataset& data,
                             std::span<const BlockId> occurrence_blocks, SplitRatios ratios,
                             std::uint64_t seed) {
  const double total = ratios.train + ratios.validation + ratios.test;
  if (ratios.train < 0 || ratios.validation < 0 || ratios.test < 0 ||
      std::abs(total - 1.0) > 1e-9)
    throw RangeError("ratios", "split ratios must be non-negative and sum to 1");

  const auto strata = block_strata(data, occurrence_blocks);

  // Region name order keeps the result independent of row order.
  std::map<std::string, std::vector<BlockId>> by_region;
  for (const auto& [block, region] : strata) by_region[data.regions.name(region)].push_back(block);

  SplitAssignment split;
  std::mt19937_64 rng(seed);
  for (auto& [region, blocks] : by_region) {
    // `blocks` is already sorted because `strata` is an ordered map.
    std::shuffle(blocks.begin(), blocks.end(), rng);
    const std::size_t n = blocks.size();
    const auto n_val = std::min<std::size_t>(
        n, static_cast<std::size_t>(std::llround(ratios.validation * static_cast<double>(n))));
    const auto n_test = std::min<std::size_t>(
        n - n_val, static_cast<std::size_t>(std::llround(ratios.test * static_cast<double>(n))));
    for (std::size_t k = 0; k < n; ++k) {
      const Split s = k < n_val ? Split::Validation
                      : k < n_val + n_test ? Split::Test
                                           : Split::Train;
      split.blocks.emplace(blocks[k], s);
    }
    if ((ratios.validation > 0 && n_val == 0) || (ratios.test > 0 && n_test == 0))
      split.warnings.push_back("region '" + region + "' has " + std::to_string(n) +
                               " block(s); too few to populate validation/test, kept in train");
  }
  derive_occurrences(split, occurrence_blocks);
  return split;
}

SplitAssignment repair_orphans(SplitAssignment split, const OccurrenceDataset& data,
                               std::span<const BlockId> occurrence_blocks) {
  if (occurrence_blocks.size() != data.size())
    throw DimensionError("block list does not match occurrence count");
  derive_occurrences(split, occurrence_blocks);
  while (true) {
    std::vector<bool> has_train(data.n_species(), false);
    for (std::size_t i = 0; i < data.size(); ++i)
      if (split.occurrences[i] == Split::Train) has_train[data.rows[i].species.value] = true;

    bool moved = false;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (has_train[data.rows[i].species.value]) continue;
      auto& s = split.blocks.at(occurrence_blocks[i]);
      if (s != Split::Train) {
        s = Split::Train;
        moved = true;
      }
    }
    if (!moved) break;
    derive_occurrences(split, occurrence_blocks);
  }
  return split;
}

std::vector<std::size_t> occurrences_in(const SplitAssignment& split, Split which) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.occurrences.size(); ++i)
    if (split.occurrences[i] == which) out.push_back(i);
  return out;
}

void write_split_csv(std::ostream& out, const SplitAssignment& split) {
  out << "block_i,block_j,split\n";
  for (const auto& [block, s] : split.blocks)
    out << block.i << ',' << block.j << ',' << to_string(s) << '\n';
}

SplitAssignment read_split_csv(std::istream& in, std::span<const BlockId> occurrence_blocks,
                               const std::string& source) {
  text::LineReader reader(in);
  std::string line;
  if (!reader.next(line) || text::trim(line) != "block_i,block_j,split")
    throw ParseError(source, reader.line_number(), "expected header 'block_i,block_j,split'");
  SplitAssignment split;
  while (reader.next(line)) {
    const auto f = text::split(line, ',');
    if (f.size() != 3) throw ParseError(source, reader.line_number(), "expected 3 fields");
    const auto i = text::parse_int(f[0]);
    const auto j = text::parse_int(f[1]);
    if (!i || !j) throw ParseError(source, reader.line_number(), "bad block index");
    const auto name = text::trim(f[2]);
    Split s;
    if (name == "train") s = Split::Train;
    else if (name == "validation") s = Split::Validation;
    else if (name == "test") s = Split::Test;
    else throw ParseError(source, reader.line_number(), "unknown split '" + std::string(name) + "'");
    split.blocks[BlockId{*i, *j}] = s;
  }
  for (const auto& b : occurrence_blocks)
    if (!split.blocks.contains(b))
      throw Error(source + ": occurrence block (" + std::to_string(b.i) + ", " +
                  std::to_string(b.j) + ") missing from split file");
  derive_occurrences(split, occurrence_blocks);
  return split;
}

}  // namespace atlas
