// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Threshold calibration under an average error budget, and thresholded
// prediction sets. Membership is eta_k >= lambda throughout.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "atlas/domain.hpp"
#include "atlas/softmax_model.hpp"

namespace atlas {

inline constexpr double kDefaultEpsilon = 0.03;

/// Fraction of true-class probabilities strictly below lambda.
/// Throws EmptyInputError for empty input.
double error_rate(std::span<const double> true_probs, double lambda);

struct CalibrationResult {
  double lambda = 1.0;
  double epsilon = 0.0;
  double empirical_error = 0.0;
  double mean_set_size = 0.0;  // NaN when no model was involved
  std::size_t n_calibration = 0;
};

/// Largest lambda in {p_1..p_n, 1} whose error rate is at most epsilon.
CalibrationResult calibrate(std::span<const double> true_probs, double epsilon);

/// Same, with true-class probabilities and the mean set size taken from a model.
CalibrationResult calibrate(const ProbabilityModel& model, const LabeledSamples& samples,
                            double epsilon);

/// eta_{y_i}(x_i) for every sample.
std::vector<double> true_class_probabilities(const ProbabilityModel& model,
                                             const LabeledSamples& samples);

/// {k : eta_k >= lambda} carrying the raw (unnormalized) probabilities.
Assemblage predict_set(const ProbabilityVector& eta_hat, double lambda);
Assemblage predict_set(std::span<const double> eta_hat, double lambda);

/// Set-size distribution, mirroring a pandas describe(): sample std (ddof 1)
/// and linearly interpolated quartiles.
struct SetSizeSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

SetSizeSummary summarize_set_sizes(std::span<const std::size_t> sizes);

/// Set sizes at lambda for n × classes probability rows.
std::vector<std::size_t> set_sizes(std::span<const double> probabilities, std::size_t classes,
                                   double lambda);

/// Set-size statistics of the model's prediction sets over `inputs` (n × dim).
SetSizeSummary mean_set_size(const ProbabilityModel& model, std::span<const double> inputs,
                             double lambda);

}  // namespace atlas
