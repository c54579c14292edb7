// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Spatial block hold-out: occurrences are grouped into lon/lat blocks, blocks
// are split train/validation/test within each region stratum, and species left
// without training data pull their blocks back into the training split.

#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "atlas/domain.hpp"

namespace atlas {

inline constexpr double kDefaultBlockSizeDeg = 0.025;

struct BlockId {
  std::int64_t i = 0;  // floor(lon / b)
  std::int64_t j = 0;  // floor(lat / b)
  friend auto operator<=>(const BlockId&, const BlockId&) = default;
};

/// One block per occurrence (same order as data.rows). Throws RangeError if b <= 0.
std::vector<BlockId> assign_blocks(const OccurrenceDataset& data, double block_size);

enum class Split : std::uint8_t { Train, Validation, Test };

std::string_view to_string(Split s) noexcept;

struct SplitRatios {
  double train = 0.90;
  double validation = 0.05;
  double test = 0.05;
};

struct SplitAssignment {
  std::map<BlockId, Split> blocks;
  std::vector<Split> occurrences;  // parallel to data.rows
  std::vector<std::string> warnings;

  std::size_t count(Split s) const;
};

/// Stratum of a block: majority region of its occurrences, ties to the
/// lexicographically smallest region name.
std::map<BlockId, std::uint32_t> block_strata(const OccurrenceDataset& data,
                                              std::span<const BlockId> occurrence_blocks);

/// Per stratum: validation and test get round(ratio * n) blocks, train the rest.
SplitAssignment split_blocks(const OccurrenceDataset& data,
                             std::span<const BlockId> occurrence_blocks, SplitRatios ratios,
                             std::uint64_t seed);

/// Moves every block holding a species without training occurrences to train,
/// until no such species remains.
SplitAssignment repair_orphans(SplitAssignment split, const OccurrenceDataset& data,
                               std::span<const BlockId> occurrence_blocks);

/// Per-split occurrence indices.
std::vector<std::size_t> occurrences_in(const SplitAssignment& split, Split which);

void write_split_csv(std::ostream& out, const SplitAssignment& split);
/// Reads `block_i,block_j,split`; occurrence assignments are re-derived from blocks.
SplitAssignment read_split_csv(std::istream& in, std::span<const BlockId> occurrence_blocks,
                               const std::string& source = "<stream>");

}  // namespace atlas
