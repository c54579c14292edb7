// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Conditional species probability estimator: a pluggable interface plus a
// linear-softmax reference model trained by minibatch SGD on the negative
// log-likelihood, with an optional label-distribution-aware margin variant.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atlas/domain.hpp"

namespace atlas {

/// Feature rows with their species labels. Features are row-major n × dim.
struct LabeledSamples {
  std::size_t dim = 0;
  std::vector<double> features;
  std::vector<SpeciesId> labels;

  explicit LabeledSamples(std::size_t d = 0) : dim(d) {}
  std::size_t size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.empty(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features).subspan(i * dim, dim);
  }
  void add(std::span<const double> x, SpeciesId label);
};

/// Anything that maps a feature vector to a distribution over C species.
class ProbabilityModel {
 public:
  virtual ~ProbabilityModel() = default;
  virtual std::size_t dim() const noexcept = 0;
  virtual std::size_t classes() const noexcept = 0;
  virtual ProbabilityVector predict_proba(std::span<const double> x) const = 0;
  /// Probabilities for n rows (n × dim in, n × classes out). Row results must
  /// not depend on which other rows share the batch.
  virtual void predict_batch(std::span<const double> features, std::size_t n,
                             std::span<double> out) const;
};

/// Numerically stable softmax. Throws RangeError on non-finite logits.
ProbabilityVector softmax(std::span<const double> logits);
/// In-place variant used on hot paths; same arithmetic as `softmax`.
void softmax_inplace(std::span<double> logits);

inline constexpr double kProbabilityFloor = 1e-12;

/// Counts how often the probability floor had to be applied.
struct LossTally {
  std::size_t clamped = 0;
};

/// -log eta_k, with eta_k floored at 1e-12.
double nll_loss(SpeciesId k, const ProbabilityVector& eta_hat, LossTally* tally = nullptr);

struct FeatureScaling {
  std::vector<double> mean;
  std::vector<double> stdev;

  static FeatureScaling identity(std::size_t dim);
  /// z-score statistics; zero-variance columns keep stdev 1.
  static FeatureScaling fit(const LabeledSamples& samples);

  friend bool operator==(const FeatureScaling&, const FeatureScaling&) = default;
};

class SoftmaxModel final : public ProbabilityModel {
 public:
  SoftmaxModel() = default;
  SoftmaxModel(std::size_t dim, std::size_t classes);

  std::size_t dim() const noexcept override { return dim_; }
  std::size_t classes() const noexcept override { return classes_; }

  /// D × C, row-major.
  std::span<double> weights() noexcept { return weights_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<double> bias() noexcept { return bias_; }
  std::span<const double> bias() const noexcept { return bias_; }
  FeatureScaling& scaling() noexcept { return scaling_; }
  const FeatureScaling& scaling() const noexcept { return scaling_; }

  /// Standardizes x into z (length dim).
  void standardize(std::span<const double> x, std::span<double> z) const;
  /// Logits for a raw (unstandardized) feature vector.
  void logits(std::span<const double> x, std::span<double> out) const;

  ProbabilityVector predict_proba(std::span<const double> x) const override;
  void predict_batch(std::span<const double> features, std::size_t n,
                     std::span<double> out) const override;

  std::string config_echo;  // training configuration, stored with the model

  friend bool operator==(const SoftmaxModel& a, const SoftmaxModel& b);

 private:
  void check_dim(std::size_t d) const;

  std::size_t dim_ = 0;
  std::size_t classes_ = 0;
  std::vector<double> weights_;
  std::vector<double> bias_;
  FeatureScaling scaling_;
};

enum class LossVariant : std::uint8_t { CrossEntropy, MarginRebalanced };

struct LearningRateSchedule {
  double initial = 0.01;
  std::vector<int> decay_epochs{50, 65};  // 0-based epoch indices
  double decay_factor = 0.1;

  double at(int epoch) const;
};

struct TrainConfig {
  LearningRateSchedule learning_rate;
  int epochs = 70;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  LossVariant loss = LossVariant::CrossEntropy;
  /// Class k's true-class logit is lowered by margin / n_k^(1/4).
  double margin = 0.5;
  /// 0-based epoch from which class reweighting is active (margin variant only).
  std::optional<int> reweight_start;
  /// Effective-number parameter for reweighting: w_k ∝ (1 - beta) / (1 - beta^n_k).
  double reweight_beta = 0.9999;
  double init_stddev = 0.01;

  /// Throws ConfigError.
  void validate() const;
};

/// Per-class adjustments applied inside the loss.
struct LossSpec {
  std::vector<double> margins;        // empty: no margin
  std::vector<double> class_weights;  // empty: unweighted
};

LossSpec make_loss_spec(const TrainConfig& cfg, std::span<const std::size_t> class_counts,
                        int epoch);

struct Gradient {
  std::vector<double> weights;
  std::vector<double> bias;
};

/// Weighted mean loss over `indices` and, if `grad` is non-null, its gradient
/// with respect to (weights, bias). Features are standardized by the model.
double loss_and_gradient(const SoftmaxModel& model, const LabeledSamples& samples,
                         std::span<const std::size_t> indices, const LossSpec& spec,
                         Gradient* grad, LossTally* tally = nullptr);

struct EpochRecord {
  int epoch = 0;  // 0-based
  double learning_rate = 0.0;
  double mean_loss = 0.0;  // mean minibatch objective over the epoch
};

struct TrainResult {
  SoftmaxModel model;
  std::vector<EpochRecord> history;
  LossTally tally;
};

using EpochCallback = std::function<void(const EpochRecord&, const SoftmaxModel&)>;

/// Throws EmptyInputError for empty data and TrainingDiverged on a NaN loss.
TrainResult train(const LabeledSamples& data, std::size_t n_classes, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Versioned text container; doubles are written in shortest round-trip form.
void save_model(std::ostream& out, const SoftmaxModel& model);
SoftmaxModel load_model(std::istream& in, const std::string& source = "<stream>");
void save_model(const std::filesystem::path& path, const SoftmaxModel& model);
SoftmaxModel load_model(const std::filesystem::path& path);

}  // namespace atlas
