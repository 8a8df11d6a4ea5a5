#ifndef TRIL3_PIPELINE_HPP
#define TRIL3_PIPELINE_HPP

#include <cstdint>

#include "tril3/ilvq.hpp"
#include "tril3/ndf.hpp"
#include "tril3/standardizer.hpp"

namespace tril3 {

struct Tril3Config {
  double real_data_ratio = 0.5;  // 1.0 is the naive (no-rehearsal) pipeline
  double jitter_sigma = 0.0;
  bool retrain_always = false;
  std::uint64_t seed = 0;
};

struct BatchOutcome {
  bool retrained = false;
  InsertionReport insertion;
};

/// Tops up the real batch with prototype-generated samples until the real
/// fraction equals `ratio`. The synthetic budget is handed out one sample at
/// a time to the currently least-represented class among classes the store
/// knows; the combined batch is then shuffled with `seed`.
Batch compose_training_batch(const PrototypeStore& store, const Batch& real,
                             double ratio, std::uint64_t seed,
                             double jitter_sigma = 0.0);

/// The full pseudo-rehearsal pipeline: online scaler, prototype store, and
/// incrementally retrained forest, driven batch by batch.
class Tril3Pipeline {
 public:
  Tril3Pipeline(Tril3Config config, IlvqParams ilvq, ForestModel forest)
      : config_(config), store_(ilvq), forest_(std::move(forest)) {}

  /// Standardizes (update then transform), feeds every sample to the
  /// prototype store, runs store maintenance, and retrains the forest on a
  /// rehearsal batch when any prototype was inserted (or retrain_always).
  BatchOutcome process_labeled_batch(const Batch& raw);

  /// Standardizes with frozen moments and predicts; touches no state.
  [[nodiscard]] std::vector<Prediction> predict_batch(const Batch& raw_unlabeled) const;

  [[nodiscard]] const RunningMoments& scaler() const { return scaler_; }
  [[nodiscard]] const PrototypeStore& store() const { return store_; }
  [[nodiscard]] const ForestModel& forest() const { return forest_; }
  [[nodiscard]] long batch_counter() const { return batch_counter_; }

 private:
  Tril3Config config_;
  RunningMoments scaler_;
  PrototypeStore store_;
  ForestModel forest_;
  long batch_counter_ = 0;
};

}  // namespace tril3

#endif  // TRIL3_PIPELINE_HPP
