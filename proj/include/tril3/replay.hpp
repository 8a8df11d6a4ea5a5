#ifndef TRIL3_REPLAY_HPP
#define TRIL3_REPLAY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <vector>

#include "tril3/ndf.hpp"
#include "tril3/sample.hpp"
#include "tril3/standardizer.hpp"

namespace tril3 {

/// Class-balanced reservoir buffer: capacity is split evenly across classes
/// seen so far, and within a class each past sample is retained with equal
/// probability.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(long capacity = 200, std::uint64_t seed = 0)
      : capacity_(capacity), rng_(seed) {}

  void update(const Batch& batch);

  /// Up to n stored samples drawn without replacement.
  [[nodiscard]] std::vector<Sample> draw(long n, std::uint64_t seed) const;

  [[nodiscard]] long stored() const;
  [[nodiscard]] long capacity() const { return capacity_; }
  [[nodiscard]] std::map<int, long> class_counts() const;

 private:
  void rebalance();
  [[nodiscard]] long quota(int label) const;

  long capacity_;
  std::mt19937_64 rng_;
  std::map<int, std::vector<Sample>> slots_;
  std::map<int, long> seen_counts_;
};

struct MlpHyperparams {
  int hidden = 128;
  double learning_rate = 0.02;
  double momentum = 0.95;
};

struct MlpGradients {
  Eigen::MatrixXd w1, w2;
  Eigen::VectorXd b1, b2;
};

/// One-hidden-layer ReLU perceptron trained with momentum SGD on
/// cross-entropy.
class MlpModel {
 public:
  MlpModel() = default;
  static MlpModel init(int num_features, int num_classes,
                       const MlpHyperparams& hp, std::uint64_t seed);

  [[nodiscard]] Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  [[nodiscard]] std::pair<double, MlpGradients> loss_and_grad(const Batch& batch) const;

  /// v <- momentum * v - lr * grad ; p <- p + v.
  void momentum_step(const MlpGradients& grads);

  [[nodiscard]] std::vector<Prediction> predict(const Batch& batch) const;

  [[nodiscard]] Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);
  [[nodiscard]] int num_features() const { return static_cast<int>(w1_.cols()); }
  [[nodiscard]] int num_classes() const { return static_cast<int>(w2_.rows()); }

  void save(std::ostream& out) const;
  static MlpModel load(std::istream& in);

 private:
  MlpHyperparams hp_;
  Eigen::MatrixXd w1_, w2_;
  Eigen::VectorXd b1_, b2_;
  Eigen::MatrixXd vw1_, vw2_;
  Eigen::VectorXd vb1_, vb2_;
};

/// One momentum-SGD epoch on the incoming batch concatenated with a buffer
/// draw of min(|batch|, stored) samples.
void replay_train_step(MlpModel& mlp, const ReplayBuffer& buf, const Batch& batch,
                       std::uint64_t seed);

struct OfflineForest {
  ForestModel forest;
  RunningMoments scaler;  // whole-train-set moments
};

/// Batch-trained forest baseline: standardizes with full-train-set moments,
/// then runs `epochs` passes of shuffled mini-batch SGD.
OfflineForest offline_fit(const ForestHyperparams& hp, const std::vector<Sample>& train,
                          int num_classes, int epochs, int mini_batch,
                          std::uint64_t seed);

}  // namespace tril3

#endif  // TRIL3_REPLAY_HPP
