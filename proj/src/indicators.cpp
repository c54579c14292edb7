// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include "atlas/indicators.hpp"

#include <cmath>
#include <ostream>

#include "atlas/assemblage_post.hpp"
#include "atlas/text.hpp"

namespace atlas {

IndicatorValue indicator_io(const Assemblage& a, const StatusIndex& statuses,
                            IndicatorTally* tally) {
  std::optional<Status> worst;
  for (const auto& m : a.members()) {
    const auto r = statuses.lookup(m.species);
    if (!r) {
      if (tally) ++tally->missing_status;
      continue;
    }
    if (!worst || rank(r->status) > rank(*worst)) worst = r->status;
  }
  return worst ? IndicatorValue::of(*worst) : IndicatorValue::nodata();
}

std::optional<Assemblage> restrict_to_status_bearing(const Assemblage& a,
                                                     const StatusIndex& statuses,
                                                     IndicatorTally* tally) {
  std::vector<AssemblageMember> kept;
  kept.reserve(a.size());
  for (const auto& m : a.members()) {
    if (statuses.lookup(m.species)) kept.push_back(m);
    else if (tally) ++tally->missing_status;
  }
  if (kept.size() == a.size() && a.normalized()) return a;
  return renormalize(Assemblage(std::move(kept)));
}

namespace {

double status_sum(const Assemblage& a, const StatusIndex& statuses, Status status) {
  double sum = 0.0;
  for (const auto& m : a.members()) {
    const auto r = statuses.lookup(m.species);
    if (r && r->status == status) sum += m.weight;
  }
  return sum;
}

}  // namespace

IndicatorValue indicator_ic(const Assemblage& a, const StatusIndex& statuses, StatusQuery query) {
  if (a.empty()) return IndicatorValue::nodata();
  if (query == StatusQuery::Threat)
    return IndicatorValue::of(status_sum(a, statuses, Status::VU) +
                              status_sum(a, statuses, Status::EN) +
                              status_sum(a, statuses, Status::CR));
  return IndicatorValue::of(status_sum(a, statuses, static_cast<Status>(query)));
}

IndicatorValue shannon(const Assemblage& a) {
  if (a.empty()) return IndicatorValue::nodata();
  double h = 0.0;
  for (const auto& m : a.members())
    if (m.weight > 0.0) h -= m.weight * std::log(m.weight);
  return IndicatorValue::of(h == 0.0 ? 0.0 : h);
}

void write_point_explanation(std::ostream& out, const Assemblage& a,
                             const SpeciesCatalog& catalog, const StatusIndex& statuses) {
  out << "species,weight,status,source\n";
  for (const auto& m : a.members()) {
    out << catalog.name(m.species) << ',' << text::format_shortest(m.weight) << ',';
    if (const auto r = statuses.lookup(m.species))
      out << to_string(r->status) << ',' << to_string(r->source);
    else
      out << "NA,NA";
    out << '\n';
  }
}

}  // namespace atlas
