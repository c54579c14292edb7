// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "atlas/conformal.hpp"
#include "atlas/error.hpp"
#include "atlas/synthetic.hpp"

using namespace atlas;

namespace {

// Largest candidate threshold whose miss rate stays within the budget.
double sweep_lambda(const std::vector<double>& p, double eps) {
  std::vector<double> candidates(p);
  candidates.push_back(1.0);
  double best = -1.0;
  for (double lam : candidates) {
    std::size_t miss = 0;
    for (double v : p) miss += v < lam;
    if (static_cast<double>(miss) / static_cast<double>(p.size()) <= eps) best = std::max(best, lam);
  }
  return best;
}

}  // namespace

TEST_CASE("error rate") {
  const std::vector<double> p{0.9, 0.8, 0.5, 0.05};
  CHECK(error_rate(p, 0.5) == 0.25);
  CHECK(error_rate(p, 0.0) == 0.0);
  CHECK(error_rate(p, std::nextafter(1.0, 2.0)) == 1.0);
  CHECK_THROWS_AS(error_rate(std::vector<double>{}, 0.5), EmptyInputError);
}

TEST_CASE("calibrate on a hand example") {
  const std::vector<double> p{0.9, 0.8, 0.5, 0.05};
  auto r = calibrate(p, 0.25);
  CHECK(r.lambda == 0.5);
  CHECK(r.empirical_error == 0.25);
  CHECK(r.n_calibration == 4);
  r = calibrate(p, 0.0);
  CHECK(r.lambda == 0.05);
  CHECK(r.empirical_error == 0.0);
  r = calibrate(p, 1.0);
  CHECK(r.lambda == 1.0);
  CHECK_THROWS_AS(calibrate(std::vector<double>{}, 0.1), EmptyInputError);
  CHECK_THROWS_AS(calibrate(p, 1.5), RangeError);
}

TEST_CASE("calibrate matches an exhaustive sweep, including ties") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> coarse(0, 8);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 37;
    std::vector<double> p(n);
    for (auto& v : p) v = trial % 2 ? u(rng) : coarse(rng) / 8.0;
    for (double eps : {0.0, 0.01, 0.03, 0.1, 0.25, 0.5, 1.0, 1.0 / 3.0}) {
      const auto r = calibrate(p, eps);
      CHECK(r.lambda == sweep_lambda(p, eps));
      CHECK(r.empirical_error <= eps);
      CHECK(r.empirical_error == error_rate(p, r.lambda));
    }
  }
}

TEST_CASE("prediction sets") {
  const std::vector<double> eta{0.6, 0.3, 0.1};
  auto s = predict_set(eta, 0.25);
  REQUIRE(s.size() == 2);
  CHECK(s.members()[0].species == SpeciesId{0});
  CHECK(s.members()[1].weight == 0.3);
  CHECK_FALSE(s.normalized());
  CHECK(predict_set(eta, 0.0).size() == 3);
  CHECK(predict_set(eta, 0.95).empty());
  CHECK(predict_set(eta, 0.3).size() == 2);  // membership is inclusive
}

TEST_CASE("set size summary") {
  const std::vector<std::size_t> sizes{1, 2, 3, 4, 10};
  const auto s = summarize_set_sizes(sizes);
  CHECK(s.mean == 4.0);
  CHECK(s.min == 1.0);
  CHECK(s.max == 10.0);
  CHECK(s.median == 3.0);
  CHECK(s.q25 == 2.0);
  CHECK(s.q75 == 4.0);
  CHECK(s.std == doctest::Approx(std::sqrt(12.5)));
}

TEST_CASE("mean set size against a per-point count") {
  const auto world = synthetic::make_niche_world(6, 2, 2.0, 1.0, 3);
  std::mt19937_64 rng(6);
  const auto data = world.sample(10, rng);
  SoftmaxModel m(2, 6);
  std::normal_distribution<double> n(0, 1);
  for (auto& w : m.weights()) w = n(rng);
  const auto s = mean_set_size(m, data.features, 0.1);
  std::size_t total = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto p = m.predict_proba(data.row(i));
    for (std::size_t k = 0; k < 6; ++k) total += p[k] >= 0.1;
  }
  CHECK(s.count == 10);
  CHECK(s.mean == doctest::Approx(double(total) / 10.0));
  CHECK(mean_set_size(m, data.features, 0.0).mean == 6.0);
}

TEST_CASE("calibrated model covers held-out data") {
  const auto world = synthetic::make_niche_world(10, 3, 2.5, 1.0, 21);
  std::mt19937_64 rng(22);
  const auto train_set = world.sample(2000, rng);
  const auto cal = world.sample(2000, rng);
  const auto test = world.sample(2000, rng);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.learning_rate.initial = 0.2;
  const auto model = train(train_set, 10, cfg).model;
  const auto r = calibrate(model, cal, 0.1);
  CHECK(r.empirical_error <= 0.1);
  CHECK(r.mean_set_size >= 1.0);
  const double held_out = error_rate(true_class_probabilities(model, test), r.lambda);
  CHECK(held_out <= 0.1 + 3 * std::sqrt(0.1 * 0.9 / 2000));
}
