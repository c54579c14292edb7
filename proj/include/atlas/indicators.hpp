// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Assemblage-level conservation indicators: most critical status, status
// proportions (including THREAT) and the Shannon index.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <variant>

#include "atlas/domain.hpp"

namespace atlas {

class IndicatorValue {
 public:
  static IndicatorValue nodata() { return IndicatorValue(); }
  static IndicatorValue of(Status s) { return IndicatorValue(Value(s)); }
  static IndicatorValue of(double v) { return IndicatorValue(Value(v)); }

  bool is_nodata() const noexcept { return std::holds_alternative<std::monostate>(value_); }
  bool is_status() const noexcept { return std::holds_alternative<Status>(value_); }
  bool is_real() const noexcept { return std::holds_alternative<double>(value_); }
  Status status() const { return std::get<Status>(value_); }
  double real() const { return std::get<double>(value_); }

  friend bool operator==(const IndicatorValue&, const IndicatorValue&) = default;

 private:
  using Value = std::variant<std::monostate, Status, double>;
  IndicatorValue() = default;
  explicit IndicatorValue(Value v) : value_(v) {}
  Value value_;
};

/// Members skipped because neither status source covers them.
struct IndicatorTally {
  std::size_t missing_status = 0;
};

/// Most critical status among members; members without status are skipped.
IndicatorValue indicator_io(const Assemblage& a, const StatusIndex& statuses,
                            IndicatorTally* tally = nullptr);

/// Drops status-less members and renormalizes the rest. nullopt when nothing is left.
std::optional<Assemblage> restrict_to_status_bearing(const Assemblage& a,
                                                     const StatusIndex& statuses,
                                                     IndicatorTally* tally = nullptr);

/// Sum of the weights of members whose status matches `query`. Expects
/// weights already normalized over status-bearing members. THREAT is
/// computed as I_VU + I_EN + I_CR.
IndicatorValue indicator_ic(const Assemblage& a, const StatusIndex& statuses, StatusQuery query);

/// -sum w ln w over members (natural log).
IndicatorValue shannon(const Assemblage& a);

/// `species,weight,status,source` for one assemblage.
void write_point_explanation(std::ostream& out, const Assemblage& a,
                             const SpeciesCatalog& catalog, const StatusIndex& statuses);

}  // namespace atlas
