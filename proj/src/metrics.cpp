// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include "atlas/metrics.hpp"

#include <algorithm>
#include <functional>
#include <vector>

#include "atlas/error.hpp"

namespace atlas {

namespace {

void check_k(std::size_t k, std::size_t classes) {
  if (k == 0) throw RangeError("k", "k must be >= 1");
  if (k > classes)
    throw RangeError("k", "k=" + std::to_string(k) + " exceeds the number of species (" +
                              std::to_string(classes) + ")");
}

}  // namespace

bool top_k_hit(std::span<const double> eta, SpeciesId y, std::size_t k) {
  check_k(k, eta.size());
  if (y.value >= eta.size()) throw RangeError("label", "label outside distribution");
  const double target = eta[y.value];
  // Hit iff fewer than k entries are strictly larger than eta[y]; this is the
  // same as eta[y] >= (k-th largest entry).
  std::size_t larger = 0;
  for (double v : eta) {
    if (v > target && ++larger >= k) return false;
  }
  return true;
}

TopKScores top_k_scores(std::span<const double> probabilities, std::size_t classes,
                        std::span<const SpeciesId> labels, std::size_t k) {
  check_k(k, classes);
  if (labels.empty()) throw EmptyInputError("top-k accuracy needs at least one sample");
  if (probabilities.size() != labels.size() * classes)
    throw DimensionError("probability matrix does not match label count");

  std::vector<std::size_t> hits(classes, 0), totals(classes, 0);
  std::size_t total_hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool hit = top_k_hit(probabilities.subspan(i * classes, classes), labels[i], k);
    ++totals[labels[i].value];
    if (hit) {
      ++hits[labels[i].value];
      ++total_hits;
    }
  }
  TopKScores s;
  s.samples = labels.size();
  s.micro = static_cast<double>(total_hits) / static_cast<double>(labels.size());
  double macro_sum = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (totals[c] == 0) continue;
    macro_sum += static_cast<double>(hits[c]) / static_cast<double>(totals[c]);
    ++s.species;
  }
  s.macro = macro_sum / static_cast<double>(s.species);
  return s;
}

std::vector<double> predict_all(const ProbabilityModel& model, const LabeledSamples& samples) {
  std::vector<double> probs(samples.size() * model.classes());
  model.predict_batch(samples.features, samples.size(), probs);
  return probs;
}

TopKScores top_k_scores(const ProbabilityModel& model, const LabeledSamples& samples,
                        std::size_t k) {
  check_k(k, model.classes());
  if (samples.empty()) throw EmptyInputError("top-k accuracy needs at least one sample");
  return top_k_scores(predict_all(model, samples), model.classes(), samples.labels, k);
}

double top_k_accuracy(const ProbabilityModel& model, const LabeledSamples& samples,
                      std::size_t k) {
  return top_k_scores(model, samples, k).micro;
}

double macro_top_k_accuracy(const ProbabilityModel& model, const LabeledSamples& samples,
                            std::size_t k) {
  return top_k_scores(model, samples, k).macro;
}

}  // namespace atlas
