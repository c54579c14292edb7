// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// In-memory raster layers and ESRI ASCII grid I/O.

#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "atlas/grid.hpp"

namespace atlas {

inline constexpr double kNodata = -9999.0;

/// How cell values are written: reals with 6 significant digits, integers
/// (status ranks 0..4, region ids, category codes) verbatim.
enum class ValueKind { Real, StatusCode, Integer };

class RasterLayer {
 public:
  RasterLayer() = default;
  RasterLayer(GridSpec grid, ValueKind kind, double nodata = kNodata);
  RasterLayer(GridSpec grid, ValueKind kind, std::vector<double> values, double nodata = kNodata);

  const GridSpec& grid() const noexcept { return grid_; }
  ValueKind kind() const noexcept { return kind_; }
  double nodata() const noexcept { return nodata_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double at(std::size_t row, std::size_t col) const { return values_[row * cols_ + col]; }
  double& at(std::size_t row, std::size_t col) { return values_[row * cols_ + col]; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  bool is_nodata(double v) const noexcept { return std::isnan(v) || v == nodata_; }

  friend bool operator==(const RasterLayer&, const RasterLayer&) = default;

 private:
  GridSpec grid_;
  ValueKind kind_ = ValueKind::Real;
  double nodata_ = kNodata;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

std::string format_cell(double v, ValueKind kind, double nodata);

/// Streams an ESRI ASCII grid row by row (north to south).
class AsciiGridWriter {
 public:
  AsciiGridWriter(std::ostream& out, const GridSpec& grid, ValueKind kind, double nodata = kNodata);
  void write_row(std::span<const double> row);
  std::size_t rows_written() const noexcept { return rows_written_; }
  /// Throws Error if fewer rows than the header announced were written.
  void finish() const;

 private:
  std::ostream& out_;
  GridSpec grid_;
  ValueKind kind_;
  double nodata_;
  std::size_t rows_written_ = 0;
};

void write_ascii_grid(std::ostream& out, const RasterLayer& layer);
void write_ascii_grid(const std::filesystem::path& path, const RasterLayer& layer);

/// Accepts xllcorner/yllcorner or xllcenter/yllcenter headers, keys in any case.
RasterLayer read_ascii_grid(std::istream& in, ValueKind kind, const std::string& source = "<stream>");
RasterLayer read_ascii_grid(const std::filesystem::path& path, ValueKind kind);

/// Copy of `layer` restricted to the cells of `sub` (which must sample the same lattice).
RasterLayer crop(const RasterLayer& layer, const GridSpec& sub);

}  // namespace atlas
