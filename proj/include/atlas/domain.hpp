// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Core vocabulary: species, conservation statuses, occurrences, probability
// vectors and species assemblages.

#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace atlas {

struct SpeciesId {
  std::uint32_t value = 0;
  friend auto operator<=>(const SpeciesId&, const SpeciesId&) = default;
};

/// Dense string interner. Ids are assigned in first-appearance order.
class NameIndex {
 public:
  std::uint32_t intern(std::string_view name);
  std::optional<std::uint32_t> find(std::string_view name) const;
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

class SpeciesCatalog {
 public:
  SpeciesId intern(std::string_view name) { return SpeciesId{names_.intern(name)}; }
  std::optional<SpeciesId> find(std::string_view name) const;
  const std::string& name(SpeciesId id) const { return names_.name(id.value); }
  std::size_t size() const noexcept { return names_.size(); }

 private:
  NameIndex names_;
};

// ---------------------------------------------------------------------------
// Conservation status

/// IUCN Red List categories in increasing order of extinction risk.
enum class Status : std::uint8_t { LC = 0, NT = 1, VU = 2, EN = 3, CR = 4 };

inline constexpr std::array<Status, 5> kAllStatuses{Status::LC, Status::NT, Status::VU, Status::EN,
                                                    Status::CR};

constexpr int rank(Status s) noexcept { return static_cast<int>(s); }

/// THREAT is the union VU ∪ EN ∪ CR; it is a query, never a stored status.
constexpr bool is_threat(Status s) noexcept { return rank(s) >= rank(Status::VU); }

std::string_view to_string(Status s) noexcept;
std::optional<Status> parse_status(std::string_view text) noexcept;
Status status_from_rank(int rank);

/// Selector for proportion indicators: a single category or THREAT.
enum class StatusQuery : std::uint8_t { LC, NT, VU, EN, CR, Threat };

constexpr bool matches(StatusQuery q, Status s) noexcept {
  return q == StatusQuery::Threat ? is_threat(s) : static_cast<int>(q) == rank(s);
}
std::string_view to_string(StatusQuery q) noexcept;
std::optional<StatusQuery> parse_status_query(std::string_view text) noexcept;

enum class StatusSource : std::uint8_t { Assessed, Predicted };

std::string_view to_string(StatusSource s) noexcept;
std::optional<StatusSource> parse_status_source(std::string_view text) noexcept;

/// Which source wins when a species carries both an assessed and a predicted status.
enum class StatusPrecedence : std::uint8_t { AssessedFirst, PredictedFirst };

struct StatusEntry {
  std::optional<Status> assessed;
  std::optional<Status> predicted;
};

struct ResolvedStatus {
  Status status;
  StatusSource source;
};

/// Status lookup by dense species id, produced by StatusTable::resolve.
class StatusIndex {
 public:
  StatusIndex() = default;
  explicit StatusIndex(std::vector<std::optional<ResolvedStatus>> by_species)
      : by_species_(std::move(by_species)) {}

  std::optional<ResolvedStatus> lookup(SpeciesId s) const noexcept {
    return s.value < by_species_.size() ? by_species_[s.value] : std::nullopt;
  }
  std::size_t size() const noexcept { return by_species_.size(); }

  /// Restriction to IUCN-assessed statuses only.
  StatusIndex assessed_only() const;

 private:
  std::vector<std::optional<ResolvedStatus>> by_species_;
};

/// Species name → (assessed, predicted) statuses, as read from the status CSV.
class StatusTable {
 public:
  /// Throws Error on a duplicate (species, source) pair.
  void add(const std::string& species, Status status, StatusSource source);

  const StatusEntry* find(std::string_view species) const;
  std::size_t species_count() const noexcept { return entries_.size(); }
  std::size_t entry_count() const noexcept { return entry_count_; }

  StatusIndex resolve(const SpeciesCatalog& catalog,
                      StatusPrecedence precedence = StatusPrecedence::AssessedFirst) const;

 private:
  std::map<std::string, StatusEntry, std::less<>> entries_;
  std::size_t entry_count_ = 0;
};

/// Status of a species. Throws MissingStatusError when neither source has it.
Status status_of(const StatusIndex& index, SpeciesId s);
Status status_of(const StatusTable& table, std::string_view species,
                 StatusPrecedence precedence = StatusPrecedence::AssessedFirst);

// ---------------------------------------------------------------------------
// Occurrences

struct Occurrence {
  SpeciesId species;
  double lon = 0.0;
  double lat = 0.0;
  std::uint32_t region = 0;
  std::uint32_t continent = 0;
};

struct OccurrenceDataset {
  SpeciesCatalog species;
  NameIndex regions;
  NameIndex continents;
  std::vector<Occurrence> rows;

  /// Appends one occurrence, interning names. Throws RangeError on bad coordinates.
  void add(std::string_view species_name, double lon, double lat, std::string_view region,
           std::string_view continent);

  std::size_t size() const noexcept { return rows.size(); }
  std::size_t n_species() const noexcept { return species.size(); }
};

OccurrenceDataset read_occurrences(std::istream& in, const std::string& source = "<stream>");
OccurrenceDataset load_occurrences(const std::filesystem::path& path);
void write_occurrences(std::ostream& out, const OccurrenceDataset& data);

StatusTable read_status_table(std::istream& in, const std::string& source = "<stream>");
StatusTable load_status_table(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Probabilities and assemblages

inline constexpr double kNormalizationTolerance = 1e-9;

/// A normalized, non-negative distribution over the species catalog.
class ProbabilityVector {
 public:
  ProbabilityVector() = default;
  /// Throws RangeError if an entry is negative/non-finite or the sum is off by more than 1e-9.
  explicit ProbabilityVector(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double operator[](SpeciesId k) const { return values_[k.value]; }

 private:
  std::vector<double> values_;
};

struct AssemblageMember {
  SpeciesId species;
  double weight = 0.0;
  friend bool operator==(const AssemblageMember&, const AssemblageMember&) = default;
};

/// A species set with per-member weights, kept sorted by species id.
class Assemblage {
 public:
  Assemblage() = default;
  /// Members are sorted; duplicate species or negative weights throw RangeError.
  explicit Assemblage(std::vector<AssemblageMember> members, bool normalized = false);

  std::span<const AssemblageMember> members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  bool normalized() const noexcept { return normalized_; }
  bool contains(SpeciesId s) const noexcept;
  double total_weight() const noexcept;

  friend bool operator==(const Assemblage&, const Assemblage&) = default;

 private:
  std::vector<AssemblageMember> members_;
  bool normalized_ = false;
};

}  // namespace atlas
