#include "tril3/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace tril3 {
namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Batch compose_training_batch(const PrototypeStore& store, const Batch& real,
                             double ratio, std::uint64_t seed, double jitter_sigma) {
  if (real.empty()) throw std::invalid_argument("compose_training_batch: empty real batch");
  if (ratio <= 0.0 || ratio > 1.0)
    throw std::invalid_argument("compose_training_batch: ratio must be in (0,1]");

  const long budget = std::lround(static_cast<double>(real.size()) * (1.0 - ratio) / ratio);
  const std::vector<int> classes = store.known_classes();

  Batch out;
  out.samples = real.samples;
  out.origin = BatchOrigin::real;
  if (budget == 0 || classes.empty()) return out;  // pure real batch, order preserved
  {
    // Greedy balancing: each synthetic sample goes to the currently
    // least-represented class among classes the store knows.
    std::map<int, long> totals;
    for (int c : classes) totals[c] = 0;
    for (const Sample& s : real.samples)
      if (s.label && totals.count(*s.label)) ++totals[*s.label];

    std::map<int, long> synth_counts;
    for (long i = 0; i < budget; ++i) {
      int target = classes.front();
      for (int c : classes)
        if (totals[c] < totals[target]) target = c;
      ++totals[target];
      ++synth_counts[target];
    }

    for (const auto& [label, count] : synth_counts) {
      auto generated = store.generate(label, count,
                                      mix_seed(seed, static_cast<std::uint64_t>(label)),
                                      jitter_sigma);
      out.samples.insert(out.samples.end(), std::make_move_iterator(generated.begin()),
                         std::make_move_iterator(generated.end()));
    }
    if (!synth_counts.empty()) out.origin = BatchOrigin::mixed;
  }

  std::mt19937_64 rng(mix_seed(seed, 0xC0FFEE));
  std::shuffle(out.samples.begin(), out.samples.end(), rng);
  return out;
}

BatchOutcome Tril3Pipeline::process_labeled_batch(const Batch& raw) {
  if (raw.empty()) throw std::invalid_argument("process_labeled_batch: empty batch");
  for (const Sample& s : raw.samples)
    if (!s.label) throw std::invalid_argument("process_labeled_batch: unlabeled sample");

  scaler_.update(raw);
  const Batch standardized = scaler_.transform(raw);

  BatchOutcome outcome;
  for (const Sample& s : standardized.samples) {
    const InsertionReport r = store_.learn_one(s.features, *s.label);
    outcome.insertion.inserted_count += r.inserted_count;
  }
  outcome.insertion.inserted = outcome.insertion.inserted_count > 0;
  store_.end_batch_maintenance();

  if (outcome.insertion.inserted || config_.retrain_always) {
    const Batch training = compose_training_batch(
        store_, standardized, config_.real_data_ratio,
        mix_seed(config_.seed, static_cast<std::uint64_t>(batch_counter_)),
        config_.jitter_sigma);
    forest_.partial_fit(training);
    outcome.retrained = true;
  }
  ++batch_counter_;
  return outcome;
}

std::vector<Prediction> Tril3Pipeline::predict_batch(const Batch& raw_unlabeled) const {
  if (scaler_.count() == 0)
    throw std::logic_error("predict_batch before any labeled batch was processed");
  return forest_.predict(scaler_.transform(raw_unlabeled));
}

}  // namespace tril3
