#ifndef TRIL3_ILVQ_HPP
#define TRIL3_ILVQ_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tril3/sample.hpp"

namespace tril3 {

struct Prototype {
  Eigen::VectorXd position;
  int label = 0;
  long win_count = 1;
  long age = 0;        // batches since last win
  bool won_in_batch = false;
};

struct IlvqParams {
  long max_per_class = 100;
  long age_limit = 50;
  double learn_rate_winner = 1.0;
  double learn_rate_runner = 0.1;
};

struct InsertionReport {
  bool inserted = false;
  long inserted_count = 0;
};

struct NearestTwo {
  std::size_t winner = 0;
  std::optional<std::size_t> runner;
  double d1 = 0.0;
  std::optional<double> d2;
};

/// Incremental LVQ prototype model: adaptive insertion, winner/runner
/// updates, and age-based pruning of stale low-win prototypes.
class PrototypeStore {
 public:
  explicit PrototypeStore(IlvqParams params = {}) : params_(params) {}

  /// Builds a store from an explicit prototype state.
  PrototypeStore(IlvqParams params, std::vector<Prototype> prototypes)
      : params_(params), prototypes_(std::move(prototypes)) {}

  /// Indices and distances of the two closest prototypes to x, ties broken
  /// by lower insertion order. Throws on an empty store.
  [[nodiscard]] NearestTwo nearest_two(const Eigen::VectorXd& x) const;

  /// Absorbs one labeled sample: inserts it as a prototype when its class is
  /// unseen or it lies beyond the insertion thresholds of both nearest
  /// prototypes, otherwise attracts/repels the winner (and attracts a
  /// same-class runner).
  InsertionReport learn_one(const Eigen::VectorXd& x, int label);

  /// Ages prototypes that did not win during the batch, removes stale
  /// below-median-win prototypes, and trims classes over max_per_class.
  /// Returns the number of prototypes removed.
  long end_batch_maintenance();

  /// Draws n samples of class `label`, positions picked uniformly with
  /// replacement from that class's prototypes, plus optional isotropic
  /// Gaussian jitter. Throws if the class has no prototype.
  [[nodiscard]] std::vector<Sample> generate(int label, long n, std::uint64_t seed,
                                             double jitter_sigma = 0.0) const;

  /// Insertion threshold of prototype idx: distance to its nearest
  /// different-class prototype, else to its farthest same-class prototype,
  /// else +infinity.
  [[nodiscard]] double threshold(std::size_t idx) const;

  [[nodiscard]] const std::vector<Prototype>& prototypes() const { return prototypes_; }
  [[nodiscard]] const IlvqParams& params() const { return params_; }
  [[nodiscard]] bool empty() const { return prototypes_.empty(); }
  [[nodiscard]] std::size_t size() const { return prototypes_.size(); }

  [[nodiscard]] bool has_class(int label) const;
  [[nodiscard]] long count_for_class(int label) const;
  /// Class ids present in the store, ascending.
  [[nodiscard]] std::vector<int> known_classes() const;
  [[nodiscard]] std::map<int, long> class_counts() const;

  /// One CSV row per prototype: label, win_count, age, position components.
  void dump_csv(std::ostream& out) const;

 private:
  IlvqParams params_;
  std::vector<Prototype> prototypes_;
};

}  // namespace tril3

#endif  // TRIL3_ILVQ_HPP
