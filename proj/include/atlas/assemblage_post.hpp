// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Continent prior filtering and renormalization of predicted assemblages.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "atlas/domain.hpp"

namespace atlas {

/// Species → continents with at least one recorded occurrence.
class ContinentPrior {
 public:
  ContinentPrior() = default;
  ContinentPrior(NameIndex continents, std::vector<std::vector<std::uint32_t>> by_species);

  std::size_t species_count() const noexcept { return by_species_.size(); }
  const NameIndex& continents() const noexcept { return continents_; }
  std::optional<std::uint32_t> continent_id(std::string_view name) const {
    return continents_.find(name);
  }
  /// Sorted continent ids. Throws RangeError for species outside the prior.
  const std::vector<std::uint32_t>& continents_of(SpeciesId s) const;
  bool allows(SpeciesId s, std::uint32_t continent) const;

 private:
  NameIndex continents_;
  std::vector<std::vector<std::uint32_t>> by_species_;
};

/// Throws Error if a catalog species has no occurrence.
ContinentPrior build_continent_prior(const OccurrenceDataset& data);

/// Drops members not known on `continent`. Members absent from the prior throw RangeError.
Assemblage filter_by_prior(const Assemblage& a, std::uint32_t continent,
                           const ContinentPrior& prior);

/// Weights divided by their sum; zero-weight members are dropped. Returns
/// nullopt for an empty or all-zero assemblage.
std::optional<Assemblage> renormalize(const Assemblage& a);

/// `species,continents` with ';'-separated continent names.
void write_prior_csv(std::ostream& out, const ContinentPrior& prior,
                     const SpeciesCatalog& catalog);

}  // namespace atlas
