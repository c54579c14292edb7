// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Set-valued evaluation: micro (per sample) and macro (per species) top-k accuracy.

#pragma once

#include <cstddef>
#include <span>

#include "atlas/domain.hpp"
#include "atlas/softmax_model.hpp"

namespace atlas {

/// True when eta[y] is at least the k-th largest entry of eta. A tie at rank k
/// counts as a hit. Throws RangeError if k == 0 or k > eta.size().
bool top_k_hit(std::span<const double> eta, SpeciesId y, std::size_t k);

struct TopKScores {
  double micro = 0.0;
  double macro = 0.0;
  std::size_t samples = 0;
  std::size_t species = 0;  // species with at least one sample
};

/// Scores from precomputed probabilities (n × classes row-major).
TopKScores top_k_scores(std::span<const double> probabilities, std::size_t classes,
                        std::span<const SpeciesId> labels, std::size_t k);

TopKScores top_k_scores(const ProbabilityModel& model, const LabeledSamples& samples,
                        std::size_t k);

double top_k_accuracy(const ProbabilityModel& model, const LabeledSamples& samples,
                      std::size_t k);
double macro_top_k_accuracy(const ProbabilityModel& model, const LabeledSamples& samples,
                            std::size_t k);

/// Probabilities for every sample, n × classes row-major.
std::vector<double> predict_all(const ProbabilityModel& model, const LabeledSamples& samples);

}  // namespace atlas
