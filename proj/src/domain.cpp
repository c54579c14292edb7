// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include "atlas/domain.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <istream>

#include "atlas/error.hpp"
#include "atlas/text.hpp"

namespace atlas {

std::uint32_t NameIndex::intern(std::string_view name) {
  if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

std::optional<std::uint32_t> NameIndex::find(std::string_view name) const {
  if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
  return std::nullopt;
}

std::optional<SpeciesId> SpeciesCatalog::find(std::string_view name) const {
  if (auto id = names_.find(name)) return SpeciesId{*id};
  return std::nullopt;
}

// --- statuses --------------------------------------------------------------

std::string_view to_string(Status s) noexcept {
  switch (s) {
    case Status::LC: return "LC";
    case Status::NT: return "NT";
    case Status::VU: return "VU";
    case Status::EN: return "EN";
    case Status::CR: return "CR";
  }
  return "?";
}

std::optional<Status> parse_status(std::string_view text) noexcept {
  for (Status s : kAllStatuses)
    if (text == to_string(s)) return s;
  return std::nullopt;
}

Status status_from_rank(int r) {
  if (r < 0 || r > 4) throw RangeError("status", "status rank out of range: " + std::to_string(r));
  return static_cast<Status>(r);
}

std::string_view to_string(StatusQuery q) noexcept {
  if (q == StatusQuery::Threat) return "THREAT";
  return to_string(static_cast<Status>(q));
}

std::optional<StatusQuery> parse_status_query(std::string_view text) noexcept {
  if (text == "THREAT") return StatusQuery::Threat;
  if (auto s = parse_status(text)) return static_cast<StatusQuery>(rank(*s));
  return std::nullopt;
}

std::string_view to_string(StatusSource s) noexcept {
  return s == StatusSource::Assessed ? "assessed" : "predicted";
}

std::optional<StatusSource> parse_status_source(std::string_view text) noexcept {
  if (text == "assessed") return StatusSource::Assessed;
  if (text == "predicted") return StatusSource::Predicted;
  return std::nullopt;
}

StatusIndex StatusIndex::assessed_only() const {
  std::vector<std::optional<ResolvedStatus>> out(by_species_.size());
  for (std::size_t i = 0; i < by_species_.size(); ++i)
    if (by_species_[i] && by_species_[i]->source == StatusSource::Assessed) out[i] = by_species_[i];
  return StatusIndex(std::move(out));
}

void StatusTable::add(const std::string& species, Status status, StatusSource source) {
  auto& entry = entries_[species];
  auto& slot = source == StatusSource::Assessed ? entry.assessed : entry.predicted;
  if (slot)
    throw Error("duplicate status entry for species '" + species + "' (" +
                std::string(to_string(source)) + ")");
  slot = status;
  ++entry_count_;
}

const StatusEntry* StatusTable::find(std::string_view species) const {
  auto it = entries_.find(species);
  return it == entries_.end() ? nullptr : &it->second;
}

namespace {

std::optional<ResolvedStatus> pick(const StatusEntry& e, StatusPrecedence precedence) {
  const bool assessed_first = precedence == StatusPrecedence::AssessedFirst;
  const auto& first = assessed_first ? e.assessed : e.predicted;
  const auto& second = assessed_first ? e.predicted : e.assessed;
  const auto first_src = assessed_first ? StatusSource::Assessed : StatusSource::Predicted;
  const auto second_src = assessed_first ? StatusSource::Predicted : StatusSource::Assessed;
  if (first) return ResolvedStatus{*first, first_src};
  if (second) return ResolvedStatus{*second, second_src};
  return std::nullopt;
}

}  // namespace

StatusIndex StatusTable::resolve(const SpeciesCatalog& catalog, StatusPrecedence precedence) const {
  std::vector<std::optional<ResolvedStatus>> out(catalog.size());
  for (std::uint32_t i = 0; i < catalog.size(); ++i) {
    if (const auto* e = find(catalog.name(SpeciesId{i}))) out[i] = pick(*e, precedence);
  }
  return StatusIndex(std::move(out));
}

Status status_of(const StatusIndex& index, SpeciesId s) {
  if (auto r = index.lookup(s)) return r->status;
  throw MissingStatusError("no status for species id " + std::to_string(s.value));
}

Status status_of(const StatusTable& table, std::string_view species, StatusPrecedence precedence) {
  if (const auto* e = table.find(species))
    if (auto r = pick(*e, precedence)) return r->status;
  throw MissingStatusError("no status for species '" + std::string(species) + "'");
}

// --- occurrences -----------------------------------------------------------

void OccurrenceDataset::add(std::string_view species_name, double lon, double lat,
                            std::string_view region, std::string_view continent) {
  if (!(lon >= -180.0 && lon <= 180.0))
    throw RangeError("lon", "lon=" + text::format_shortest(lon) + " outside [-180, 180]");
  if (!(lat >= -90.0 && lat <= 90.0))
    throw RangeError("lat", "lat=" + text::format_shortest(lat) + " outside [-90, 90]");
  rows.push_back(Occurrence{species.intern(species_name), lon, lat, regions.intern(region),
                            continents.intern(continent)});
}

// --- probabilities ---------------------------------------------------------

ProbabilityVector::ProbabilityVector(std::vector<double> values) : values_(std::move(values)) {
  double sum = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0)
      throw RangeError("probability", "probability entries must be finite and non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kNormalizationTolerance)
    throw RangeError("probability", "probability vector sums to " + text::format_shortest(sum));
}

Assemblage::Assemblage(std::vector<AssemblageMember> members, bool normalized)
    : members_(std::move(members)), normalized_(normalized) {
  std::sort(members_.begin(), members_.end(),
            [](const auto& a, const auto& b) { return a.species < b.species; });
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (!(members_[i].weight >= 0.0) || !std::isfinite(members_[i].weight))
      throw RangeError("weight", "assemblage weights must be finite and non-negative");
    if (i > 0 && members_[i].species == members_[i - 1].species)
      throw RangeError("species", "duplicate assemblage member " +
                                      std::to_string(members_[i].species.value));
  }
}

bool Assemblage::contains(SpeciesId s) const noexcept {
  return std::binary_search(members_.begin(), members_.end(), AssemblageMember{s, 0.0},
                            [](const auto& a, const auto& b) { return a.species < b.species; });
}

double Assemblage::total_weight() const noexcept {
  double sum = 0.0;
  for (const auto& m : members_) sum += m.weight;
  return sum;
}

}  // namespace atlas
