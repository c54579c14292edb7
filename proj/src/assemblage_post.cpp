// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include "atlas/assemblage_post.hpp"

#include <algorithm>
#include <ostream>

#include "atlas/error.hpp"

namespace atlas {

ContinentPrior::ContinentPrior(NameIndex continents,
                               std::vector<std::vector<std::uint32_t>> by_species)
    : continents_(std::move(continents)), by_species_(std::move(by_species)) {
  for (auto& v : by_species_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
}

const std::vector<std::uint32_t>& ContinentPrior::continents_of(SpeciesId s) const {
  if (s.value >= by_species_.size())
    throw RangeError("species", "species id " + std::to_string(s.value) + " not in prior");
  return by_species_[s.value];
}

bool ContinentPrior::allows(SpeciesId s, std::uint32_t continent) const {
  const auto& v = continents_of(s);
  return std::binary_search(v.begin(), v.end(), continent);
}

ContinentPrior build_continent_prior(const OccurrenceDataset& data) {
  std::vector<std::vector<std::uint32_t>> by_species(data.n_species());
  for (const auto& o : data.rows) by_species[o.species.value].push_back(o.continent);
  for (std::uint32_t s = 0; s < by_species.size(); ++s)
    if (by_species[s].empty())
      throw Error("species '" + data.species.name(SpeciesId{s}) + "' has no occurrences");
  return ContinentPrior(data.continents, std::move(by_species));
}

Assemblage filter_by_prior(const Assemblage& a, std::uint32_t continent,
                           const ContinentPrior& prior) {
  std::vector<AssemblageMember> kept;
  kept.reserve(a.size());
  for (const auto& m : a.members())
    if (prior.allows(m.species, continent)) kept.push_back(m);
  return Assemblage(std::move(kept), false);
}

std::optional<Assemblage> renormalize(const Assemblage& a) {
  double total = 0.0;
  for (const auto& m : a.members()) total += m.weight;
  if (!(total > 0.0)) return std::nullopt;
  std::vector<AssemblageMember> out;
  out.reserve(a.size());
  for (const auto& m : a.members())
    if (m.weight > 0.0) out.push_back({m.species, m.weight / total});
  return Assemblage(std::move(out), true);
}

void write_prior_csv(std::ostream& out, const ContinentPrior& prior,
                     const SpeciesCatalog& catalog) {
  out << "species,continents\n";
  for (std::uint32_t s = 0; s < prior.species_count(); ++s) {
    out << catalog.name(SpeciesId{s}) << ',';
    const auto& conts = prior.continents_of(SpeciesId{s});
    for (std::size_t k = 0; k < conts.size(); ++k) {
      if (k) out << ';';
      out << prior.continents().name(conts[k]);
    }
    out << '\n';
  }
}

}  // namespace atlas
