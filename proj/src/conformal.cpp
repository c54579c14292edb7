// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include "atlas/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "atlas/error.hpp"
#include "atlas/kernels.hpp"
#include "atlas/metrics.hpp"

namespace atlas {

double error_rate(std::span<const double> true_probs, double lambda) {
  if (true_probs.empty()) throw EmptyInputError("error rate of an empty calibration set");
  return static_cast<double>(kernels::count_below(true_probs, lambda)) /
         static_cast<double>(true_probs.size());
}

CalibrationResult calibrate(std::span<const double> true_probs, double epsilon) {
  if (true_probs.empty()) throw EmptyInputError("calibration set is empty");
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw RangeError("epsilon", "epsilon must lie in [0, 1]");
  for (double p : true_probs)
    if (!(p >= 0.0 && p <= 1.0)) throw RangeError("probability", "probabilities must lie in [0, 1]");

  std::vector<double> sorted(true_probs.begin(), true_probs.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const auto rate = [n](std::size_t m) { return static_cast<double>(m) / static_cast<double>(n); };

  // m = number of misses allowed: the largest m with m / n <= epsilon, computed
  // with the same floating-point comparison the error rate is judged by.
  auto m = static_cast<std::size_t>(std::floor(epsilon * static_cast<double>(n)));
  m = std::min(m, n);
  while (m < n && rate(m + 1) <= epsilon) ++m;
  while (m > 0 && rate(m) > epsilon) --m;

  CalibrationResult r;
  r.epsilon = epsilon;
  r.n_calibration = n;
  r.lambda = m < n ? sorted[m] : 1.0;
  r.empirical_error = error_rate(true_probs, r.lambda);
  r.mean_set_size = std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::vector<double> true_class_probabilities(const ProbabilityModel& model,
                                             const LabeledSamples& samples) {
  const auto probs = predict_all(model, samples);
  const std::size_t c = model.classes();
  std::vector<double> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) out[i] = probs[i * c + samples.labels[i].value];
  return out;
}

CalibrationResult calibrate(const ProbabilityModel& model, const LabeledSamples& samples,
                            double epsilon) {
  if (samples.empty()) throw EmptyInputError("calibration set is empty");
  const auto probs = predict_all(model, samples);
  const std::size_t c = model.classes();
  std::vector<double> truth(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) truth[i] = probs[i * c + samples.labels[i].value];
  CalibrationResult r = calibrate(truth, epsilon);
  r.mean_set_size = summarize_set_sizes(set_sizes(probs, c, r.lambda)).mean;
  return r;
}

Assemblage predict_set(std::span<const double> eta_hat, double lambda) {
  std::vector<std::uint32_t> idx(eta_hat.size());
  const std::size_t k = kernels::select_at_least(eta_hat, lambda, idx);
  std::vector<AssemblageMember> members;
  members.reserve(k);
  for (std::size_t i = 0; i < k; ++i) members.push_back({SpeciesId{idx[i]}, eta_hat[idx[i]]});
  return Assemblage(std::move(members));
}

Assemblage predict_set(const ProbabilityVector& eta_hat, double lambda) {
  return predict_set(eta_hat.values(), lambda);
}

namespace {

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + (v[hi] - v[lo]) * frac;
}

}  // namespace

SetSizeSummary summarize_set_sizes(std::span<const std::size_t> sizes) {
  if (sizes.empty()) throw EmptyInputError("no set sizes to summarize");
  std::vector<double> v(sizes.begin(), sizes.end());
  std::sort(v.begin(), v.end());
  SetSizeSummary s;
  s.count = v.size();
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  s.min = v.front();
  s.max = v.back();
  s.q25 = quantile_sorted(v, 0.25);
  s.median = quantile_sorted(v, 0.5);
  s.q75 = quantile_sorted(v, 0.75);
  return s;
}

std::vector<std::size_t> set_sizes(std::span<const double> probabilities, std::size_t classes,
                                   double lambda) {
  if (classes == 0) throw DimensionError("zero classes");
  const std::size_t n = probabilities.size() / classes;
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = probabilities.subspan(i * classes, classes);
    out[i] = classes - kernels::count_below(row, lambda);
  }
  return out;
}

SetSizeSummary mean_set_size(const ProbabilityModel& model, std::span<const double> inputs,
                             double lambda) {
  const std::size_t d = model.dim();
  if (d == 0 || inputs.empty() || inputs.size() % d != 0)
    throw EmptyInputError("mean_set_size needs at least one complete input row");
  const std::size_t n = inputs.size() / d;
  std::vector<double> probs(n * model.classes());
  model.predict_batch(inputs, n, probs);
  return summarize_set_sizes(set_sizes(probs, model.classes(), lambda));
}

}  // namespace atlas
