// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Batched map inference: for every land cell of a grid, predict the species
// distribution, threshold it into an assemblage, filter it by the continent
// prior, renormalize, and evaluate the requested indicators.
//
// The grid is processed in waves of whole rows. Each wave is split into row
// strips handled by independent workers; finished rows are handed to a sink
// in row order once the buffered cell count reaches the configured limit, so
// memory stays bounded by the buffer and the output does not depend on batch
// size or worker count.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atlas/assemblage_post.hpp"
#include "atlas/domain.hpp"
#include "atlas/feature_stack.hpp"
#include "atlas/grid.hpp"
#include "atlas/raster.hpp"
#include "atlas/softmax_model.hpp"

namespace atlas {

enum class IndicatorKind : std::uint8_t { MostCritical, LC, NT, VU, EN, CR, Threat, Shannon };

struct IndicatorRequest {
  IndicatorKind kind = IndicatorKind::MostCritical;
  bool assessed_only = false;  // the "IUCN" variant

  /// File stem, e.g. "I_O", "I_CR", "I_THREAT_IUCN", "I_H".
  std::string name() const;
  ValueKind value_kind() const noexcept {
    return kind == IndicatorKind::MostCritical ? ValueKind::StatusCode : ValueKind::Real;
  }
  friend bool operator==(const IndicatorRequest&, const IndicatorRequest&) = default;
};

/// Accepts "IO", "LC".."CR", "THREAT", "H", optionally suffixed "_IUCN"
/// (also the file-stem spelling "I_O", "I_CR", ...). Throws ConfigError.
IndicatorRequest parse_indicator(std::string_view text);
std::vector<IndicatorRequest> all_indicators(bool with_assessed_variants);

struct MapOptions {
  std::size_t batch_size = 512;
  std::size_t buffer_cells = 50000;
  unsigned workers = 1;
  int patch_radius = 0;
};

struct MapInputs {
  const ProbabilityModel* model = nullptr;
  const FeatureStack* stack = nullptr;
  double lambda = 0.0;
  const ContinentPrior* prior = nullptr;  // null: no continent filtering
  const StatusIndex* statuses = nullptr;
  GridSpec grid;
  std::vector<IndicatorRequest> indicators;
};

struct MapTally {
  std::size_t cells = 0;
  std::size_t land_cells = 0;
  std::size_t nodata_feature_cells = 0;   // land cells with a NaN/nodata covariate
  std::size_t unknown_continent_cells = 0;
  std::size_t empty_before_filter = 0;    // no species above lambda
  std::size_t empty_after_filter = 0;     // everything removed by the prior
  std::size_t missing_status_members = 0;
  std::size_t set_size_sum = 0;           // |S| before filtering, over predicted cells
  std::size_t filtered_size_sum = 0;      // |S'| after filtering
  std::map<std::size_t, std::size_t> removed_histogram;  // |S| - |S'| → cells

  void merge(const MapTally& other);
};

/// Indicator values of one predicted distribution, in request order.
/// `continent` is the prior's continent id (nullopt: no filtering, or an
/// unknown continent when `unknown_continent` is set).
struct CellEvaluation {
  std::vector<double> values;  // NaN marks nodata
  std::size_t set_size = 0;
  std::size_t filtered_size = 0;
  std::size_t missing_status = 0;
};

CellEvaluation evaluate_cell(std::span<const double> eta_hat, double lambda,
                             const ContinentPrior* prior, std::optional<std::uint32_t> continent,
                             const StatusIndex& statuses, const StatusIndex& assessed,
                             std::span<const IndicatorRequest> indicators);

/// Receives completed rows, in order, for every requested layer.
class RasterSink {
 public:
  virtual ~RasterSink() = default;
  virtual void begin(const GridSpec& grid, std::span<const IndicatorRequest> indicators) = 0;
  /// layers[l] holds row_count * cols values for indicator l.
  virtual void rows(std::size_t first_row, std::size_t row_count,
                    std::span<const std::vector<double>> layers) = 0;
  virtual void end() = 0;
};

/// Collects every layer in memory.
class MemorySink final : public RasterSink {
 public:
  void begin(const GridSpec& grid, std::span<const IndicatorRequest> indicators) override;
  void rows(std::size_t first_row, std::size_t row_count,
            std::span<const std::vector<double>> layers) override;
  void end() override {}
  std::vector<RasterLayer> take() { return std::move(layers_); }

 private:
  std::vector<RasterLayer> layers_;
};

/// Streams each layer to `<dir>/<name>.asc`, writing into a temporary file
/// that is renamed on `end()`.
class AsciiDirectorySink final : public RasterSink {
 public:
  explicit AsciiDirectorySink(std::filesystem::path dir);
  ~AsciiDirectorySink() override;
  void begin(const GridSpec& grid, std::span<const IndicatorRequest> indicators) override;
  void rows(std::size_t first_row, std::size_t row_count,
            std::span<const std::vector<double>> layers) override;
  void end() override;
  const std::vector<std::filesystem::path>& written() const noexcept { return written_; }

 private:
  struct Output;
  std::filesystem::path dir_;
  std::vector<std::unique_ptr<Output>> outputs_;
  std::vector<std::filesystem::path> written_;
  std::size_t cols_ = 0;
};

/// Throws DimensionError/ConfigError before any work if inputs disagree.
void preflight(const MapInputs& inputs, const MapOptions& options);

MapTally run_map(const MapInputs& inputs, const MapOptions& options, RasterSink& sink);

/// In-memory convenience wrapper; one layer per requested indicator.
std::vector<RasterLayer> batch_predict_map(const MapInputs& inputs, const MapOptions& options,
                                           MapTally* tally = nullptr);

}  // namespace atlas
