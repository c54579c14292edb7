// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include "atlas/map_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include "atlas/conformal.hpp"
#include "atlas/error.hpp"
#include "atlas/indicators.hpp"

namespace atlas {

namespace {

constexpr double kCellNodata = std::numeric_limits<double>::quiet_NaN();

constexpr std::string_view kind_code(IndicatorKind k) {
  switch (k) {
    case IndicatorKind::MostCritical: return "O";
    case IndicatorKind::LC: return "LC";
    case IndicatorKind::NT: return "NT";
    case IndicatorKind::VU: return "VU";
    case IndicatorKind::EN: return "EN";
    case IndicatorKind::CR: return "CR";
    case IndicatorKind::Threat: return "THREAT";
    case IndicatorKind::Shannon: return "H";
  }
  return "?";
}

StatusQuery query_of(IndicatorKind k) {
  switch (k) {
    case IndicatorKind::LC: return StatusQuery::LC;
    case IndicatorKind::NT: return StatusQuery::NT;
    case IndicatorKind::VU: return StatusQuery::VU;
    case IndicatorKind::EN: return StatusQuery::EN;
    case IndicatorKind::CR: return StatusQuery::CR;
    default: return StatusQuery::Threat;
  }
}

}  // namespace

std::string IndicatorRequest::name() const {
  std::string n = "I_" + std::string(kind_code(kind));
  if (assessed_only) n += "_IUCN";
  return n;
}

IndicatorRequest parse_indicator(std::string_view text) {
  IndicatorRequest req;
  std::string_view t = text;
  if (t.starts_with("I_")) t.remove_prefix(2);
  constexpr std::string_view suffix = "_IUCN";
  if (t.ends_with(suffix)) {
    req.assessed_only = true;
    t.remove_suffix(suffix.size());
  }
  if (t == "IO" || t == "O") req.kind = IndicatorKind::MostCritical;
  else if (t == "LC") req.kind = IndicatorKind::LC;
  else if (t == "NT") req.kind = IndicatorKind::NT;
  else if (t == "VU") req.kind = IndicatorKind::VU;
  else if (t == "EN") req.kind = IndicatorKind::EN;
  else if (t == "CR") req.kind = IndicatorKind::CR;
  else if (t == "THREAT") req.kind = IndicatorKind::Threat;
  else if (t == "H") req.kind = IndicatorKind::Shannon;
  else throw ConfigError("unknown indicator '" + std::string(text) + "'");
  return req;
}

std::vector<IndicatorRequest> all_indicators(bool with_assessed_variants) {
  std::vector<IndicatorRequest> out;
  for (bool assessed : {false, true}) {
    if (assessed && !with_assessed_variants) break;
    for (auto k : {IndicatorKind::MostCritical, IndicatorKind::LC, IndicatorKind::NT,
                   IndicatorKind::VU, IndicatorKind::EN, IndicatorKind::CR, IndicatorKind::Threat,
                   IndicatorKind::Shannon})
      out.push_back({k, assessed});
  }
  return out;
}

void MapTally::merge(const MapTally& o) {
  cells += o.cells;
  land_cells += o.land_cells;
  nodata_feature_cells += o.nodata_feature_cells;
  unknown_continent_cells += o.unknown_continent_cells;
  empty_before_filter += o.empty_before_filter;
  empty_after_filter += o.empty_after_filter;
  missing_status_members += o.missing_status_members;
  set_size_sum += o.set_size_sum;
  filtered_size_sum += o.filtered_size_sum;
  for (const auto& [k, v] : o.removed_histogram) removed_histogram[k] += v;
}

CellEvaluation evaluate_cell(std::span<const double> eta_hat, double lambda,
                             const ContinentPrior* prior, std::optional<std::uint32_t> continent,
                             const StatusIndex& statuses, const StatusIndex& assessed,
                             std::span<const IndicatorRequest> indicators) {
  CellEvaluation out;
  out.values.assign(indicators.size(), kCellNodata);

  const Assemblage raw = predict_set(eta_hat, lambda);
  out.set_size = raw.size();
  const Assemblage filtered =
      prior == nullptr ? raw
      : continent      ? filter_by_prior(raw, *continent, *prior)
                       : Assemblage();
  out.filtered_size = filtered.size();
  const auto assemblage = renormalize(filtered);
  if (!assemblage) return out;

  for (const auto& m : assemblage->members())
    if (!statuses.lookup(m.species)) ++out.missing_status;

  std::optional<std::optional<Assemblage>> restricted[2];
  const auto restricted_for = [&](bool assessed_only) -> const std::optional<Assemblage>& {
    auto& slot = restricted[assessed_only ? 1 : 0];
    if (!slot) slot = restrict_to_status_bearing(*assemblage, assessed_only ? assessed : statuses);
    return *slot;
  };

  for (std::size_t i = 0; i < indicators.size(); ++i) {
    const auto& req = indicators[i];
    const StatusIndex& index = req.assessed_only ? assessed : statuses;
    IndicatorValue v = IndicatorValue::nodata();
    switch (req.kind) {
      case IndicatorKind::MostCritical:
        v = indicator_io(*assemblage, index);
        break;
      case IndicatorKind::Shannon:
        if (!req.assessed_only) v = shannon(*assemblage);
        else if (const auto& r = restricted_for(true)) v = shannon(*r);
        break;
      default:
        if (const auto& r = restricted_for(req.assessed_only))
          v = indicator_ic(*r, index, query_of(req.kind));
        break;
    }
    if (v.is_status()) out.values[i] = static_cast<double>(rank(v.status()));
    else if (v.is_real()) out.values[i] = v.real();
  }
  return out;
}

// --- sinks -------------------------------------------------------------------

void MemorySink::begin(const GridSpec& grid, std::span<const IndicatorRequest> indicators) {
  layers_.clear();
  for (const auto& req : indicators) layers_.emplace_back(grid, req.value_kind());
}

void MemorySink::rows(std::size_t first_row, std::size_t row_count,
                      std::span<const std::vector<double>> layers) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    auto dst = layers_[l].values().subspan(first_row * layers_[l].cols(),
                                           row_count * layers_[l].cols());
    for (std::size_t i = 0; i < dst.size(); ++i)
      dst[i] = std::isnan(layers[l][i]) ? layers_[l].nodata() : layers[l][i];
  }
}

struct AsciiDirectorySink::Output {
  std::filesystem::path final_path;
  std::filesystem::path temp_path;
  std::ofstream stream;
  std::optional<AsciiGridWriter> writer;
};

AsciiDirectorySink::AsciiDirectorySink(std::filesystem::path dir) : dir_(std::move(dir)) {}

AsciiDirectorySink::~AsciiDirectorySink() {
  for (auto& o : outputs_) {
    if (!o->temp_path.empty()) {
      o->stream.close();
      std::error_code ec;
      std::filesystem::remove(o->temp_path, ec);
    }
  }
}

void AsciiDirectorySink::begin(const GridSpec& grid, std::span<const IndicatorRequest> indicators) {
  std::filesystem::create_directories(dir_);
  cols_ = grid.cols();
  for (const auto& req : indicators) {
    auto o = std::make_unique<Output>();
    o->final_path = dir_ / (req.name() + ".asc");
    o->temp_path = dir_ / (req.name() + ".asc.partial");
    o->stream.open(o->temp_path, std::ios::binary | std::ios::trunc);
    if (!o->stream) throw Error("cannot write " + o->temp_path.string());
    o->writer.emplace(o->stream, grid, req.value_kind());
    outputs_.push_back(std::move(o));
  }
}

void AsciiDirectorySink::rows(std::size_t, std::size_t row_count,
                              std::span<const std::vector<double>> layers) {
  for (std::size_t l = 0; l < outputs_.size(); ++l)
    for (std::size_t r = 0; r < row_count; ++r)
      outputs_[l]->writer->write_row(std::span<const double>(layers[l]).subspan(r * cols_, cols_));
}

void AsciiDirectorySink::end() {
  for (auto& o : outputs_) {
    o->writer->finish();
    o->stream.close();
    if (!o->stream) throw Error("failed writing " + o->temp_path.string());
  }
  for (auto& o : outputs_) {
    std::filesystem::rename(o->temp_path, o->final_path);
    o->temp_path.clear();
    written_.push_back(o->final_path);
  }
}

// --- driver ------------------------------------------------------------------

void preflight(const MapInputs& in, const MapOptions& options) {
  if (!in.model || !in.stack || !in.statuses) throw ConfigError("map inputs are incomplete");
  in.grid.validate();
  if (in.model->dim() != in.stack->dim())
    throw DimensionError("model expects " + std::to_string(in.model->dim()) +
                         " features but the stack provides " + std::to_string(in.stack->dim()));
  if (in.statuses->size() != in.model->classes())
    throw DimensionError("status index covers " + std::to_string(in.statuses->size()) +
                         " species, model predicts " + std::to_string(in.model->classes()));
  if (in.prior && in.prior->species_count() != in.model->classes())
    throw DimensionError("continent prior covers " + std::to_string(in.prior->species_count()) +
                         " species, model predicts " + std::to_string(in.model->classes()));
  if (!(in.lambda >= 0.0 && in.lambda <= 1.0)) throw RangeError("lambda", "lambda must lie in [0, 1]");
  if (in.indicators.empty()) throw ConfigError("no indicators requested");
  if (options.batch_size == 0) throw ConfigError("map.batch_size must be >= 1");
  if (options.buffer_cells == 0) throw ConfigError("map.buffer_cells must be >= 1");
  if (options.workers == 0) throw ConfigError("map.workers must be >= 1");
  if (options.patch_radius < 0) throw ConfigError("features.patch_radius must be >= 0");
}

namespace {

struct StripContext {
  const MapInputs& in;
  const MapOptions& options;
  const StatusIndex& assessed;
};

struct PendingCell {
  std::size_t offset;  // row-local position within the strip buffer
  std::optional<std::uint32_t> continent;
};

/// Computes rows [first, first + count) into `layers` (each count * cols values).
void process_strip(const StripContext& ctx, std::size_t first, std::size_t count,
                   std::vector<std::vector<double>>& layers, MapTally& tally) {
  const auto& in = ctx.in;
  const std::size_t cols = in.grid.cols();
  const std::size_t dim = in.model->dim();
  const std::size_t classes = in.model->classes();
  const std::size_t n_ind = in.indicators.size();
  const std::size_t batch = ctx.options.batch_size;

  layers.assign(n_ind, std::vector<double>(count * cols, kCellNodata));
  std::vector<double> features(batch * dim);
  std::vector<double> probs(batch * classes);
  std::vector<PendingCell> pending;
  pending.reserve(batch);

  const auto flush = [&]() {
    if (pending.empty()) return;
    in.model->predict_batch(std::span<const double>(features).first(pending.size() * dim),
                            pending.size(), probs);
    for (std::size_t b = 0; b < pending.size(); ++b) {
      const auto eval = evaluate_cell(std::span<const double>(probs).subspan(b * classes, classes),
                                      in.lambda, in.prior, pending[b].continent, *in.statuses,
                                      ctx.assessed, in.indicators);
      for (std::size_t l = 0; l < n_ind; ++l) layers[l][pending[b].offset] = eval.values[l];
      tally.set_size_sum += eval.set_size;
      tally.missing_status_members += eval.missing_status;
      if (eval.set_size == 0) {
        ++tally.empty_before_filter;
      } else {
        tally.filtered_size_sum += eval.filtered_size;
        ++tally.removed_histogram[eval.set_size - eval.filtered_size];
        if (eval.filtered_size == 0) ++tally.empty_after_filter;
      }
    }
    pending.clear();
  };

  const auto& stack = *in.stack;
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t row = first + r;
    const double lat = in.grid.lat(row);
    for (std::size_t c = 0; c < cols; ++c) {
      ++tally.cells;
      const auto cell = stack.locate(in.grid.lon(c), lat);
      if (!cell || !stack.is_land(cell->first, cell->second)) continue;
      ++tally.land_cells;

      std::optional<std::uint32_t> continent;
      if (in.prior && stack.has_continent()) {
        const auto label = stack.continent_at(cell->first, cell->second);
        if (!label) {
          ++tally.unknown_continent_cells;
          continue;
        }
        continent = in.prior->continent_id(*label);
      }
      auto slot = std::span<double>(features).subspan(pending.size() * dim, dim);
      if (!stack.features_at_cell(cell->first, cell->second, ctx.options.patch_radius, slot)) {
        ++tally.nodata_feature_cells;
        continue;
      }
      pending.push_back(PendingCell{r * cols + c, continent});
      if (pending.size() == batch) flush();
    }
  }
  flush();
}

}  // namespace

MapTally run_map(const MapInputs& in, const MapOptions& options, RasterSink& sink) {
  preflight(in, options);
  const StatusIndex assessed = in.statuses->assessed_only();
  MapInputs effective = in;
  if (in.prior && !in.stack->has_continent()) effective.prior = nullptr;
  const StripContext ctx{effective, options, assessed};

  const std::size_t rows = in.grid.rows();
  const std::size_t cols = in.grid.cols();
  const std::size_t workers = options.workers;
  // Rows per wave: enough to reach the buffer limit, at least one per worker.
  const std::size_t wave_rows =
      std::max<std::size_t>(workers, (options.buffer_cells + cols - 1) / cols);

  sink.begin(in.grid, in.indicators);
  MapTally total;
  std::vector<std::vector<std::vector<double>>> strip_layers(workers);
  std::vector<MapTally> strip_tally(workers);
  std::vector<std::vector<double>> wave(in.indicators.size());

  for (std::size_t wave_first = 0; wave_first < rows; wave_first += wave_rows) {
    const std::size_t wave_count = std::min(wave_rows, rows - wave_first);
    const std::size_t per = (wave_count + workers - 1) / workers;
    std::vector<std::pair<std::size_t, std::size_t>> strips;
    for (std::size_t s = 0; s < workers; ++s) {
      const std::size_t a = std::min(wave_count, s * per);
      const std::size_t b = std::min(wave_count, a + per);
      strips.emplace_back(wave_first + a, b - a);
    }
    for (auto& t : strip_tally) t = MapTally{};

    if (workers == 1) {
      process_strip(ctx, strips[0].first, strips[0].second, strip_layers[0], strip_tally[0]);
    } else {
      std::vector<std::exception_ptr> errors(workers);
      std::vector<std::thread> threads;
      for (std::size_t s = 0; s < workers; ++s) {
        if (strips[s].second == 0) {
          strip_layers[s].assign(in.indicators.size(), {});
          continue;
        }
        threads.emplace_back([&, s] {
          try {
            process_strip(ctx, strips[s].first, strips[s].second, strip_layers[s], strip_tally[s]);
          } catch (...) {
            errors[s] = std::current_exception();
          }
        });
      }
      for (auto& t : threads) t.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }

    for (std::size_t l = 0; l < in.indicators.size(); ++l) {
      wave[l].clear();
      for (std::size_t s = 0; s < workers; ++s)
        if (strips[s].second > 0)
          wave[l].insert(wave[l].end(), strip_layers[s][l].begin(), strip_layers[s][l].end());
    }
    for (const auto& t : strip_tally) total.merge(t);
    sink.rows(wave_first, wave_count, wave);
  }
  sink.end();
  return total;
}

std::vector<RasterLayer> batch_predict_map(const MapInputs& inputs, const MapOptions& options,
                                           MapTally* tally) {
  MemorySink sink;
  const auto t = run_map(inputs, options, sink);
  if (tally) *tally = t;
  return sink.take();
}

}  // namespace atlas
