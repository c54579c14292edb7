// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Occurrence and status CSV readers/writers.

#include <fstream>
#include <istream>
#include <ostream>

#include "atlas/domain.hpp"
#include "atlas/error.hpp"
#include "atlas/text.hpp"

namespace atlas {

namespace {

constexpr std::string_view kOccurrenceHeader = "species,lon,lat,region,continent";
constexpr std::string_view kStatusHeader = "species,status,source";

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

}  // namespace

OccurrenceDataset read_occurrences(std::istream& in, const std::string& source) {
  text::LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw ParseError(source, reader.line_number(), "missing header");
  if (text::trim(line) != kOccurrenceHeader)
    throw ParseError(source, reader.line_number(),
                     "expected header '" + std::string(kOccurrenceHeader) + "'");

  OccurrenceDataset data;
  while (reader.next(line)) {
    const auto fields = text::split(line, ',');
    if (fields.size() != 5)
      throw ParseError(source, reader.line_number(),
                       "expected 5 fields, got " + std::to_string(fields.size()));
    const auto species = text::trim(fields[0]);
    if (species.empty()) throw ParseError(source, reader.line_number(), "empty species name");
    const auto lon = text::parse_double(fields[1]);
    const auto lat = text::parse_double(fields[2]);
    if (!lon) throw ParseError(source, reader.line_number(), "field 'lon' is not a number");
    if (!lat) throw ParseError(source, reader.line_number(), "field 'lat' is not a number");
    try {
      data.add(species, *lon, *lat, text::trim(fields[3]), text::trim(fields[4]));
    } catch (const RangeError& e) {
      throw ParseError(source, reader.line_number(), "field '" + e.field() + "': " + e.what());
    }
  }
  return data;
}

OccurrenceDataset load_occurrences(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_occurrences(in, path.string());
}

void write_occurrences(std::ostream& out, const OccurrenceDataset& data) {
  out << kOccurrenceHeader << '\n';
  for (const auto& o : data.rows) {
    out << data.species.name(o.species) << ',' << text::format_shortest(o.lon) << ','
        << text::format_shortest(o.lat) << ',' << data.regions.name(o.region) << ','
        << data.continents.name(o.continent) << '\n';
  }
}

StatusTable read_status_table(std::istream& in, const std::string& source) {
  text::LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw ParseError(source, reader.line_number(), "missing header");
  if (text::trim(line) != kStatusHeader)
    throw ParseError(source, reader.line_number(),
                     "expected header '" + std::string(kStatusHeader) + "'");

  StatusTable table;
  while (reader.next(line)) {
    const auto fields = text::split(line, ',');
    if (fields.size() != 3)
      throw ParseError(source, reader.line_number(),
                       "expected 3 fields, got " + std::to_string(fields.size()));
    const auto species = std::string(text::trim(fields[0]));
    const auto status_text = text::trim(fields[1]);
    const auto status = parse_status(status_text);
    if (!status)
      throw ParseError(source, reader.line_number(),
                       "unknown status '" + std::string(status_text) + "'");
    const auto src_text = text::trim(fields[2]);
    const auto src = parse_status_source(src_text);
    if (!src)
      throw ParseError(source, reader.line_number(),
                       "unknown source '" + std::string(src_text) + "'");
    try {
      table.add(species, *status, *src);
    } catch (const Error& e) {
      throw ParseError(source, reader.line_number(), e.what());
    }
  }
  return table;
}

StatusTable load_status_table(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_status_table(in, path.string());
}

}  // namespace atlas
