// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include "atlas/softmax_model.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "atlas/error.hpp"
#include "atlas/kernels.hpp"
#include "atlas/text.hpp"

namespace atlas {

void LabeledSamples::add(std::span<const double> x, SpeciesId label) {
  if (x.size() != dim)
    throw DimensionError("sample has " + std::to_string(x.size()) + " features, expected " +
                         std::to_string(dim));
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
}

void ProbabilityModel::predict_batch(std::span<const double> features, std::size_t n,
                                     std::span<double> out) const {
  const std::size_t d = dim();
  const std::size_t c = classes();
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = predict_proba(features.subspan(i * d, d));
    std::copy(p.values().begin(), p.values().end(), out.begin() + static_cast<std::ptrdiff_t>(i * c));
  }
}

// --- softmax / loss ----------------------------------------------------------

void softmax_inplace(std::span<double> z) {
  if (z.empty()) throw RangeError("logits", "softmax of an empty vector");
  for (double v : z)
    if (!std::isfinite(v)) throw RangeError("logits", "softmax input is not finite");
  const double m = kernels::max(z);
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  kernels::divide(z, sum);
}

ProbabilityVector softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  softmax_inplace(p);
  return ProbabilityVector(std::move(p));
}

double nll_loss(SpeciesId k, const ProbabilityVector& eta_hat, LossTally* tally) {
  if (k.value >= eta_hat.size())
    throw RangeError("species", "label " + std::to_string(k.value) + " outside distribution");
  double p = eta_hat[k];
  if (p < kProbabilityFloor) {
    p = kProbabilityFloor;
    if (tally) ++tally->clamped;
  }
  return -std::log(p);
}

// --- scaling -------------------------------------------------------------------

FeatureScaling FeatureScaling::identity(std::size_t dim) {
  return FeatureScaling{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

FeatureScaling FeatureScaling::fit(const LabeledSamples& samples) {
  const std::size_t d = samples.dim;
  FeatureScaling s = identity(d);
  const std::size_t n = samples.size();
  if (n == 0) return s;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = samples.row(i);
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += row[j];
  }
  for (double& m : s.mean) m /= static_cast<double>(n);
  std::vector<double> var(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = samples.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = row[j] - s.mean[j];
      var[j] += dev * dev;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j] / static_cast<double>(n));
    s.stdev[j] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

// --- model ----------------------------------------------------------------------

SoftmaxModel::SoftmaxModel(std::size_t dim, std::size_t classes)
    : dim_(dim),
      classes_(classes),
      weights_(dim * classes, 0.0),
      bias_(classes, 0.0),
      scaling_(FeatureScaling::identity(dim)) {
  if (classes == 0) throw DimensionError("model needs at least one class");
}

bool operator==(const SoftmaxModel& a, const SoftmaxModel& b) {
  return a.dim_ == b.dim_ && a.classes_ == b.classes_ && a.weights_ == b.weights_ &&
         a.bias_ == b.bias_ && a.scaling_ == b.scaling_ && a.config_echo == b.config_echo;
}

void SoftmaxModel::check_dim(std::size_t d) const {
  if (d != dim_)
    throw DimensionError("feature vector has " + std::to_string(d) + " entries, model expects " +
                         std::to_string(dim_));
}

void SoftmaxModel::standardize(std::span<const double> x, std::span<double> z) const {
  check_dim(x.size());
  for (std::size_t j = 0; j < dim_; ++j) z[j] = (x[j] - scaling_.mean[j]) / scaling_.stdev[j];
}

void SoftmaxModel::logits(std::span<const double> x, std::span<double> out) const {
  std::vector<double> z(dim_);
  standardize(x, z);
  kernels::affine(weights_, bias_, z, out.first(classes_));
}

ProbabilityVector SoftmaxModel::predict_proba(std::span<const double> x) const {
  std::vector<double> out(classes_);
  logits(x, out);
  softmax_inplace(out);
  return ProbabilityVector(std::move(out));
}

void SoftmaxModel::predict_batch(std::span<const double> features, std::size_t n,
                                 std::span<double> out) const {
  if (features.size() != n * dim_) check_dim(n == 0 ? 0 : features.size() / n);
  if (out.size() < n * classes_) throw DimensionError("output buffer too small");
  std::vector<double> z(dim_);
  for (std::size_t i = 0; i < n; ++i) {
    standardize(features.subspan(i * dim_, dim_), z);
    auto row = out.subspan(i * classes_, classes_);
    kernels::affine(weights_, bias_, z, row);
    softmax_inplace(row);
  }
}

// --- training -------------------------------------------------------------------

double LearningRateSchedule::at(int epoch) const {
  double lr = initial;
  for (int d : decay_epochs)
    if (epoch >= d) lr *= decay_factor;
  return lr;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(learning_rate.initial > 0.0)) throw ConfigError("train.learning_rate must be > 0");
  if (!(learning_rate.decay_factor > 0.0 && learning_rate.decay_factor <= 1.0))
    throw ConfigError("train.decay_factor must lie in (0, 1]");
  if (!(margin >= 0.0)) throw ConfigError("train.margin must be >= 0");
  if (!(reweight_beta >= 0.0 && reweight_beta < 1.0))
    throw ConfigError("train.reweight_beta must lie in [0, 1)");
  if (!(init_stddev >= 0.0)) throw ConfigError("train.init_stddev must be >= 0");
}

LossSpec make_loss_spec(const TrainConfig& cfg, std::span<const std::size_t> class_counts,
                        int epoch) {
  LossSpec spec;
  if (cfg.loss != LossVariant::MarginRebalanced) return spec;
  const std::size_t c = class_counts.size();
  spec.margins.assign(c, 0.0);
  for (std::size_t k = 0; k < c; ++k)
    if (class_counts[k] > 0)
      spec.margins[k] = cfg.margin / std::pow(static_cast<double>(class_counts[k]), 0.25);

  if (cfg.reweight_start && epoch >= *cfg.reweight_start) {
    spec.class_weights.assign(c, 0.0);
    double total = 0.0;
    std::size_t present = 0;
    for (std::size_t k = 0; k < c; ++k) {
      if (class_counts[k] == 0) continue;
      const double effective =
          1.0 - std::pow(cfg.reweight_beta, static_cast<double>(class_counts[k]));
      spec.class_weights[k] = (1.0 - cfg.reweight_beta) / effective;
      total += spec.class_weights[k];
      ++present;
    }
    for (double& w : spec.class_weights) w *= static_cast<double>(present) / total;
  }
  return spec;
}

double loss_and_gradient(const SoftmaxModel& model, const LabeledSamples& samples,
                         std::span<const std::size_t> indices, const LossSpec& spec,
                         Gradient* grad, LossTally* tally) {
  const std::size_t d = model.dim();
  const std::size_t c = model.classes();
  if (samples.dim != d)
    throw DimensionError("samples have " + std::to_string(samples.dim) + " features, model " +
                         std::to_string(d));
  if (grad) {
    grad->weights.assign(d * c, 0.0);
    grad->bias.assign(c, 0.0);
  }
  std::vector<double> z(d);
  std::vector<double> p(c);
  double loss_sum = 0.0;
  double weight_sum = 0.0;
  for (std::size_t idx : indices) {
    const std::size_t y = samples.labels[idx].value;
    if (y >= c) throw RangeError("label", "label " + std::to_string(y) + " >= classes");
    model.standardize(samples.row(idx), z);
    kernels::affine(model.weights(), model.bias(), z, p);
    if (!spec.margins.empty()) p[y] = p[y] - spec.margins[y];
    softmax_inplace(p);
    const double w = spec.class_weights.empty() ? 1.0 : spec.class_weights[y];
    double py = p[y];
    if (py < kProbabilityFloor) {
      py = kProbabilityFloor;
      if (tally) ++tally->clamped;
    }
    loss_sum += w * -std::log(py);
    weight_sum += w;
    if (grad) {
      // dL/dlogits = w * (p - onehot(y))
      p[y] -= 1.0;
      for (double& v : p) v *= w;
      for (std::size_t j = 0; j < d; ++j)
        kernels::axpy(z[j], p, std::span<double>(grad->weights).subspan(j * c, c));
      kernels::axpy(1.0, p, grad->bias);
    }
  }
  if (weight_sum == 0.0) return 0.0;
  if (grad) {
    for (double& g : grad->weights) g /= weight_sum;
    for (double& g : grad->bias) g /= weight_sum;
  }
  return loss_sum / weight_sum;
}

namespace {

double truncated_normal(std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> normal(0.0, 1.0);
  while (true) {
    const double v = normal(rng);
    if (std::abs(v) <= 2.0) return v * stddev;
  }
}

}  // namespace

TrainResult train(const LabeledSamples& data, std::size_t n_classes, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.empty()) throw EmptyInputError("training set is empty");
  if (n_classes == 0) throw EmptyInputError("training needs at least one class");
  for (double v : data.features)
    if (!std::isfinite(v)) throw RangeError("features", "training features must be finite");

  TrainResult result;
  SoftmaxModel& model = result.model;
  model = SoftmaxModel(data.dim, n_classes);
  model.scaling() = FeatureScaling::fit(data);

  std::mt19937_64 rng(cfg.seed);
  for (double& w : model.weights()) w = truncated_normal(rng, cfg.init_stddev);

  std::vector<std::size_t> counts(n_classes, 0);
  for (auto y : data.labels) {
    if (y.value >= n_classes) throw RangeError("label", "label outside class range");
    ++counts[y.value];
  }

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Gradient grad;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.learning_rate.at(epoch);
    const LossSpec spec = make_loss_spec(cfg, counts, epoch);
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - start);
      const std::span<const std::size_t> batch(order.data() + start, len);
      double loss;
      try {
        loss = loss_and_gradient(model, data, batch, spec, &grad, &result.tally);
      } catch (const RangeError&) {
        loss = std::numeric_limits<double>::quiet_NaN();  // logits overflowed
      }
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "loss became non-finite at epoch " << epoch << ", batch starting at " << start
            << " (learning rate " << lr << ")";
        throw TrainingDiverged(msg.str());
      }
      epoch_loss += loss * static_cast<double>(len);
      kernels::axpy(-lr, grad.weights, model.weights());
      kernels::axpy(-lr, grad.bias, model.bias());
      const auto finite = [](double v) { return std::isfinite(v); };
      if (!std::all_of(model.weights().begin(), model.weights().end(), finite) ||
          !std::all_of(model.bias().begin(), model.bias().end(), finite)) {
        std::ostringstream msg;
        msg << "parameters became non-finite at epoch " << epoch << ", batch starting at "
            << start << " (learning rate " << lr << ")";
        throw TrainingDiverged(msg.str());
      }
    }
    EpochRecord rec{epoch, lr, epoch_loss / static_cast<double>(order.size())};
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec, model);
  }
  return result;
}

// --- persistence ------------------------------------------------------------------

namespace {

constexpr std::string_view kMagic = "ATLAS-SOFTMAX-MODEL";
constexpr int kFormatVersion = 1;

void write_row(std::ostream& out, std::string_view key, std::span<const double> values) {
  out << key;
  for (double v : values) out << ' ' << text::format_shortest(v);
  out << '\n';
}

std::vector<double> read_row(std::istream& in, std::string_view key, std::size_t n,
                             const std::string& source) {
  std::string tag;
  if (!(in >> tag) || tag != key) throw ParseError(source, 0, "expected '" + std::string(key) + "'");
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string tok;
    if (!(in >> tok)) throw ParseError(source, 0, "truncated '" + std::string(key) + "' row");
    auto v = text::parse_double(tok);
    if (!v || !std::isfinite(*v))
      throw ParseError(source, 0, "bad value in '" + std::string(key) + "' row");
    values[i] = *v;
  }
  return values;
}

}  // namespace

void save_model(std::ostream& out, const SoftmaxModel& model) {
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "dim " << model.dim() << '\n';
  out << "classes " << model.classes() << '\n';
  std::string echo = model.config_echo;
  std::replace(echo.begin(), echo.end(), '\n', ' ');
  out << "config " << (echo.empty() ? "{}" : echo) << '\n';
  write_row(out, "mean", model.scaling().mean);
  write_row(out, "stdev", model.scaling().stdev);
  write_row(out, "bias", model.bias());
  for (std::size_t j = 0; j < model.dim(); ++j)
    write_row(out, "w", model.weights().subspan(j * model.classes(), model.classes()));
}

SoftmaxModel load_model(std::istream& in, const std::string& source) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic)
    throw ParseError(source, 1, "not an atlas model file");
  if (version != kFormatVersion)
    throw ParseError(source, 1, "unsupported model format version " + std::to_string(version));
  std::string key;
  std::size_t dim = 0, classes = 0;
  if (!(in >> key >> dim) || key != "dim") throw ParseError(source, 2, "expected 'dim'");
  if (!(in >> key >> classes) || key != "classes") throw ParseError(source, 3, "expected 'classes'");
  if (!(in >> key) || key != "config") throw ParseError(source, 4, "expected 'config'");
  std::string echo;
  std::getline(in, echo);
  SoftmaxModel model(dim, classes);
  model.config_echo = std::string(text::trim(echo));
  model.scaling().mean = read_row(in, "mean", dim, source);
  model.scaling().stdev = read_row(in, "stdev", dim, source);
  const auto bias = read_row(in, "bias", classes, source);
  std::copy(bias.begin(), bias.end(), model.bias().begin());
  for (std::size_t j = 0; j < dim; ++j) {
    const auto row = read_row(in, "w", classes, source);
    std::copy(row.begin(), row.end(), model.weights().begin() + static_cast<std::ptrdiff_t>(j * classes));
  }
  for (double s : model.scaling().stdev)
    if (!(s > 0.0)) throw ParseError(source, 0, "non-positive stdev in model");
  return model;
}

void save_model(const std::filesystem::path& path, const SoftmaxModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  save_model(out, model);
}

SoftmaxModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return load_model(in, path.string());
}

}  // namespace atlas
