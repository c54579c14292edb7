// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include "atlas/raster.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "atlas/error.hpp"
#include "atlas/text.hpp"

namespace atlas {

RasterLayer::RasterLayer(GridSpec grid, ValueKind kind, double nodata)
    : grid_(grid), kind_(kind), nodata_(nodata), rows_(grid.rows()), cols_(grid.cols()) {
  grid_.validate();
  values_.assign(rows_ * cols_, nodata_);
}

RasterLayer::RasterLayer(GridSpec grid, ValueKind kind, std::vector<double> values, double nodata)
    : RasterLayer(grid, kind, nodata) {
  if (values.size() != rows_ * cols_)
    throw DimensionError("raster has " + std::to_string(values.size()) + " values, grid needs " +
                         std::to_string(rows_ * cols_));
  values_ = std::move(values);
}

std::string format_cell(double v, ValueKind kind, double nodata) {
  if (std::isnan(v) || v == nodata) v = nodata;
  if (kind == ValueKind::Real && v != nodata) return text::format_significant(v, 6);
  if (v == std::round(v)) return std::to_string(static_cast<long long>(v));
  return text::format_significant(v, 6);
}

namespace {

void write_header(std::ostream& out, const GridSpec& g, double nodata) {
  out << "ncols " << g.cols() << '\n'
      << "nrows " << g.rows() << '\n'
      << "xllcorner " << text::format_shortest(g.lon0 - g.step / 2) << '\n'
      << "yllcorner " << text::format_shortest(g.lat0 - g.step / 2) << '\n'
      << "cellsize " << text::format_shortest(g.step) << '\n'
      << "NODATA_value " << format_cell(nodata, ValueKind::Integer, nodata) << '\n';
}

}  // namespace

AsciiGridWriter::AsciiGridWriter(std::ostream& out, const GridSpec& grid, ValueKind kind,
                                 double nodata)
    : out_(out), grid_(grid), kind_(kind), nodata_(nodata) {
  grid_.validate();
  write_header(out_, grid_, nodata_);
}

void AsciiGridWriter::write_row(std::span<const double> row) {
  if (row.size() != grid_.cols()) throw DimensionError("row width does not match grid");
  if (rows_written_ >= grid_.rows()) throw Error("more rows than the grid declares");
  std::string line;
  line.reserve(row.size() * 8);
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (c) line.push_back(' ');
    line += format_cell(row[c], kind_, nodata_);
  }
  line.push_back('\n');
  out_ << line;
  ++rows_written_;
}

void AsciiGridWriter::finish() const {
  if (rows_written_ != grid_.rows())
    throw Error("ascii grid incomplete: " + std::to_string(rows_written_) + " of " +
                std::to_string(grid_.rows()) + " rows written");
  out_.flush();
}

void write_ascii_grid(std::ostream& out, const RasterLayer& layer) {
  AsciiGridWriter w(out, layer.grid(), layer.kind(), layer.nodata());
  for (std::size_t r = 0; r < layer.rows(); ++r)
    w.write_row(layer.values().subspan(r * layer.cols(), layer.cols()));
  w.finish();
}

void write_ascii_grid(const std::filesystem::path& path, const RasterLayer& layer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_ascii_grid(out, layer);
}

RasterLayer read_ascii_grid(std::istream& in, ValueKind kind, const std::string& source) {
  std::map<std::string, double> header;
  std::string key;
  std::size_t line = 0;
  // Header: keyword/value pairs until the first numeric token.
  while (in >> std::ws && in.peek() != EOF && std::isalpha(in.peek())) {
    std::string value;
    ++line;
    if (!(in >> key >> value)) throw ParseError(source, line, "truncated header");
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    const auto v = text::parse_double(value);
    if (!v) throw ParseError(source, line, "bad header value for '" + key + "'");
    header[key] = *v;
  }
  const auto need = [&](const std::string& k) {
    auto it = header.find(k);
    if (it == header.end()) throw ParseError(source, line, "missing header key '" + k + "'");
    return it->second;
  };
  const auto ncols = static_cast<std::size_t>(need("ncols"));
  const auto nrows = static_cast<std::size_t>(need("nrows"));
  const double cellsize = need("cellsize");
  const double nodata = header.contains("nodata_value") ? header["nodata_value"] : kNodata;
  double lon0, lat0;
  if (header.contains("xllcenter")) lon0 = header["xllcenter"];
  else lon0 = need("xllcorner") + cellsize / 2;
  if (header.contains("yllcenter")) lat0 = header["yllcenter"];
  else lat0 = need("yllcorner") + cellsize / 2;
  if (ncols < 2 || nrows < 2 || !(cellsize > 0.0))
    throw ParseError(source, line, "grids need at least 2 rows, 2 columns and a positive cellsize");

  GridSpec g{lon0, lon0 + static_cast<double>(ncols - 1) * cellsize, lat0,
             lat0 + static_cast<double>(nrows - 1) * cellsize, cellsize};
  std::vector<double> values(ncols * nrows);
  std::string tok;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(in >> tok))
      throw ParseError(source, line + 1 + i / ncols,
                       "expected " + std::to_string(values.size()) + " values, got " +
                           std::to_string(i));
    const auto v = text::parse_double(tok);
    if (!v) throw ParseError(source, line + 1 + i / ncols, "bad cell value '" + tok + "'");
    values[i] = *v;
  }
  return RasterLayer(g, kind, std::move(values), nodata);
}

RasterLayer read_ascii_grid(const std::filesystem::path& path, ValueKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_ascii_grid(in, kind, path.string());
}

RasterLayer crop(const RasterLayer& layer, const GridSpec& sub) {
  RasterLayer out(sub, layer.kind(), layer.nodata());
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) {
      const auto cell = layer.grid().locate(sub.lon(c), sub.lat(r));
      if (!cell) throw DimensionError("crop region extends beyond the source raster");
      out.at(r, c) = layer.at(cell->first, cell->second);
    }
  return out;
}

}  // namespace atlas
