#include "tril3/pipeline.hpp"

#include <map>

#include "doctest.h"
#include "support.hpp"

using namespace tril3;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd x(2);
  x << a, b;
  return x;
}

Batch labeled_batch(const std::vector<std::pair<Eigen::VectorXd, int>>& rows) {
  Batch b;
  for (const auto& [x, y] : rows) b.samples.push_back({x, y});
  return b;
}

Tril3Pipeline make_pipeline(double ratio, std::uint64_t seed = 0,
                            bool retrain_always = false) {
  Tril3Config cfg;
  cfg.real_data_ratio = ratio;
  cfg.retrain_always = retrain_always;
  cfg.seed = seed;
  return {cfg, IlvqParams{}, ForestModel::init(2, 2, {4, 3, 1.0, 0.05}, seed + 1)};
}

}  // namespace

TEST_CASE("compose: ratio 0.5 with 16 real gives 16 synthetic") {
  std::vector<Prototype> protos{{vec2(0, 0), 0, 1, 0, false}, {vec2(1, 1), 1, 1, 0, false}};
  PrototypeStore store(IlvqParams{}, std::move(protos));
  Batch real;
  for (int i = 0; i < 16; ++i) real.samples.push_back({vec2(i, i), i % 2});
  const Batch out = compose_training_batch(store, real, 0.5, 3);
  CHECK(out.size() == 32);
  CHECK(out.origin == BatchOrigin::mixed);
}

TEST_CASE("compose: ratio 1.0 returns the real batch untouched") {
  std::vector<Prototype> protos{{vec2(0, 0), 0, 1, 0, false}};
  PrototypeStore store(IlvqParams{}, std::move(protos));
  Batch real;
  for (int i = 0; i < 10; ++i) real.samples.push_back({vec2(i, 0), 0});
  const Batch out = compose_training_batch(store, real, 1.0, 9);
  REQUIRE(out.size() == 10);
  for (std::size_t i = 0; i < out.size(); ++i)
    CHECK(out.samples[i].features == real.samples[i].features);
  CHECK(out.origin == BatchOrigin::real);
}

TEST_CASE("compose: balancing sends the whole budget to the missing class") {
  std::vector<Prototype> protos{{vec2(0, 0), 0, 1, 0, false}, {vec2(5, 5), 1, 1, 0, false}};
  PrototypeStore store(IlvqParams{}, std::move(protos));
  Batch real;
  for (int i = 0; i < 10; ++i) real.samples.push_back({vec2(i, 0), 0});
  const Batch out = compose_training_batch(store, real, 0.5, 7);
  REQUIRE(out.size() == 20);
  std::map<int, int> counts;
  for (const Sample& s : out.samples) ++counts[*s.label];
  CHECK(counts[0] == 10);
  CHECK(counts[1] == 10);
  // All class-1 samples are synthetic copies of the only class-1 prototype.
  for (const Sample& s : out.samples)
    if (*s.label == 1) CHECK(s.features == vec2(5, 5));
}

TEST_CASE("compose: empty store leaves the budget unfilled") {
  PrototypeStore store;
  Batch real;
  real.samples.push_back({vec2(1, 2), 0});
  const Batch out = compose_training_batch(store, real, 0.5, 0);
  CHECK(out.size() == 1);
}

TEST_CASE("compose: synthetic labels come only from classes with prototypes") {
  std::vector<Prototype> protos{{vec2(0, 0), 3, 1, 0, false}};
  PrototypeStore store(IlvqParams{}, std::move(protos));
  Batch real;
  for (int i = 0; i < 8; ++i) real.samples.push_back({vec2(i + 1.0, 5.0), 0});
  const Batch out = compose_training_batch(store, real, 0.5, 1);
  int synthetic = 0;
  for (const Sample& s : out.samples)
    if (s.features == vec2(0, 0)) {
      CHECK(*s.label == 3);
      ++synthetic;
    }
  CHECK(synthetic == 8);
}

TEST_CASE("cold start always retrains") {
  auto pipeline = make_pipeline(0.5);
  Batch first;
  first.samples = testing::two_gaussians(32, 7);
  const BatchOutcome out = pipeline.process_labeled_batch(first);
  CHECK(out.retrained);
  CHECK(out.insertion.inserted);
}

TEST_CASE("replaying a well-absorbed batch leaves the forest bit-identical") {
  auto pipeline = make_pipeline(0.5, 11);
  Batch batch;
  batch.samples = testing::two_gaussians(16, 13);
  pipeline.process_labeled_batch(batch);
  // Absorb the same points repeatedly until no insertions occur.
  bool saw_quiet_batch = false;
  for (int round = 0; round < 50 && !saw_quiet_batch; ++round) {
    const Eigen::VectorXd before = pipeline.forest().parameters();
    const BatchOutcome out = pipeline.process_labeled_batch(batch);
    if (!out.insertion.inserted) {
      CHECK(!out.retrained);
      CHECK(pipeline.forest().parameters() == before);
      saw_quiet_batch = true;
    }
  }
  CHECK(saw_quiet_batch);
}

TEST_CASE("ratio 1.0 pipeline never sees synthetic samples") {
  auto pipeline = make_pipeline(1.0, 17);
  for (int b = 0; b < 5; ++b) {
    Batch batch;
    batch.samples = testing::two_gaussians(32, 100 + b);
    const BatchOutcome out = pipeline.process_labeled_batch(batch);
    (void)out;
  }
  // With ratio 1.0 the store may grow, but the forest was only ever fit on
  // real standardized batches; nothing observable distinguishes this from a
  // rehearsal-free run. Check via compose_training_batch directly:
  Batch real;
  real.samples = testing::two_gaussians(8, 999);
  const Batch composed =
      compose_training_batch(pipeline.store(), real, 1.0, 0);
  CHECK(composed.size() == real.size());
  CHECK(composed.origin == BatchOrigin::real);
}

TEST_CASE("prediction is pure and repeatable") {
  auto pipeline = make_pipeline(0.5, 19);
  Batch train;
  train.samples = testing::two_gaussians(64, 23);
  pipeline.process_labeled_batch(train);

  Batch query;
  query.samples = testing::two_gaussians(10, 29);
  for (auto& s : query.samples) s.label.reset();

  const auto before_scaler = pipeline.scaler().count();
  const auto before_store = pipeline.store().size();
  const auto before_params = pipeline.forest().parameters();
  const auto a = pipeline.predict_batch(query);
  const auto b = pipeline.predict_batch(query);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].label == b[i].label);
    CHECK(a[i].probabilities == b[i].probabilities);
  }
  CHECK(pipeline.scaler().count() == before_scaler);
  CHECK(pipeline.store().size() == before_store);
  CHECK(pipeline.forest().parameters() == before_params);
}

TEST_CASE("single-class cold start predicts that class everywhere") {
  Tril3Config cfg;
  cfg.real_data_ratio = 1.0;
  cfg.retrain_always = true;
  cfg.seed = 31;
  Tril3Pipeline pipeline(cfg, IlvqParams{}, ForestModel::init(2, 2, {4, 3, 1.0, 0.5}, 32));
  for (int b = 0; b < 20; ++b) {
    Batch batch;
    for (int i = 0; i < 16; ++i) {
      Eigen::VectorXd x = vec2(1.0 + 0.01 * i, 2.0 - 0.01 * b);
      batch.samples.push_back({x, 1});
    }
    pipeline.process_labeled_batch(batch);
  }
  Batch query;
  query.samples = testing::two_gaussians(20, 33);
  for (const auto& p : pipeline.predict_batch(query)) CHECK(p.label == 1);
}

TEST_CASE("prediction before any training is an error") {
  auto pipeline = make_pipeline(0.5);
  Batch query;
  query.samples = testing::two_gaussians(2, 1);
  CHECK_THROWS_AS(pipeline.predict_batch(query), std::logic_error);
}

TEST_CASE("empty or unlabeled batches are rejected") {
  auto pipeline = make_pipeline(0.5);
  CHECK_THROWS_AS(pipeline.process_labeled_batch(Batch{}), std::invalid_argument);
  Batch unlabeled;
  unlabeled.samples = testing::two_gaussians(4, 2);
  unlabeled.samples[2].label.reset();
  CHECK_THROWS_AS(pipeline.process_labeled_batch(unlabeled), std::invalid_argument);
}
