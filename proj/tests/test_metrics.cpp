#include "tril3/metrics.hpp"

#include <random>

#include "doctest.h"

using namespace tril3;

TEST_CASE("perfect predictions give F1 = 1 everywhere") {
  const std::vector<int> y{0, 1, 2, 1, 0, 2};
  const Eigen::VectorXd f1 = f1_per_class(y, y, 3);
  for (int c = 0; c < 3; ++c) CHECK(f1[c] == doctest::Approx(1.0));
}

TEST_CASE("TP=1, FP=1, FN=1 gives F1 = 0.5") {
  // Class 0: one hit, one false alarm, one miss.
  const std::vector<int> truths{0, 1, 0, 1};
  const std::vector<int> preds{0, 0, 1, 1};
  const Eigen::VectorXd f1 = f1_per_class(preds, truths, 2);
  CHECK(f1[0] == doctest::Approx(0.5));
  CHECK(f1[1] == doctest::Approx(0.5));
}

TEST_CASE("a class absent from both sides scores 0 by convention") {
  const std::vector<int> truths{0, 0, 1};
  const std::vector<int> preds{0, 0, 1};
  const Eigen::VectorXd f1 = f1_per_class(preds, truths, 3);
  CHECK(f1[2] == 0.0);
}

TEST_CASE("length mismatch and bad labels are rejected") {
  CHECK_THROWS_AS(f1_per_class({0, 1}, {0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(f1_per_class({0, 5}, {0, 1}, 2), std::invalid_argument);
}

TEST_CASE("matches the brute-force confusion oracle on random pairs") {
  const int k = 4;
  std::mt19937_64 rng(2718);
  std::uniform_int_distribution<int> cls(0, k - 1);
  std::vector<int> truths(1000), preds(1000);
  for (int i = 0; i < 1000; ++i) {
    truths[i] = cls(rng);
    preds[i] = cls(rng);
  }
  const Eigen::VectorXd f1 = f1_per_class(preds, truths, k);

  // Independent oracle: full confusion matrix, then one-vs-rest F1.
  std::vector<std::vector<long>> confusion(k, std::vector<long>(k, 0));
  for (int i = 0; i < 1000; ++i) ++confusion[truths[i]][preds[i]];
  for (int c = 0; c < k; ++c) {
    long tp = confusion[c][c], fp = 0, fn = 0;
    for (int o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += confusion[o][c];
      fn += confusion[c][o];
    }
    const double precision = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
    const double expected =
        precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    CHECK(f1[c] == expected);
  }
}

TEST_CASE("phase means split at the window boundaries") {
  MetricsTimeline timeline;
  for (long i = 0; i < 10; ++i) {
    BatchRecord r;
    r.batch_idx = i;
    r.f1 = Eigen::VectorXd::Constant(1, static_cast<double>(i));
    timeline.records.push_back(r);
  }
  const PhaseSummary s = summarize_phases(timeline, 4, 8);
  CHECK(s.before_mean[0] == doctest::Approx(1.5));   // mean of 0..3
  CHECK(s.during_mean[0] == doctest::Approx(5.5));   // mean of 4..7
}

TEST_CASE("a phase without evaluation points is an error") {
  MetricsTimeline timeline;
  BatchRecord r;
  r.batch_idx = 0;
  r.f1 = Eigen::VectorXd::Zero(1);
  timeline.records.push_back(r);
  CHECK_THROWS_AS(summarize_phases(timeline, 0, 1), std::invalid_argument);
}
