#ifndef TRIL3_NDF_HPP
#define TRIL3_NDF_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tril3/sample.hpp"

namespace tril3 {

/// One soft decision tree. Internal nodes live in heap order (children of n
/// at 2n+1 / 2n+2); a tree of depth d has 2^d - 1 internal nodes and 2^d
/// leaves. Each node routes via sigmoid(w . x_subset + b).
struct TreeModel {
  int depth = 0;
  std::vector<int> feature_subset;
  Eigen::MatrixXd routing_weights;  // nodes x subset size
  Eigen::VectorXd routing_bias;     // nodes
  Eigen::MatrixXd leaf_logits;      // leaves x num_classes

  [[nodiscard]] Eigen::Index num_nodes() const { return routing_bias.size(); }
  [[nodiscard]] Eigen::Index num_leaves() const { return leaf_logits.rows(); }
};

/// Leaf-reaching probabilities mu for one tree and input; sums to 1.
Eigen::VectorXd leaf_reach_probabilities(const TreeModel& tree, const Eigen::VectorXd& x);

/// Class distribution predicted by one tree: sum_l mu(l) * softmax(logits_l).
Eigen::VectorXd tree_forward(const TreeModel& tree, const Eigen::VectorXd& x);

struct ForestHyperparams {
  int num_trees = 10;
  int depth = 5;
  double subset_fraction = 0.5;
  double learning_rate = 0.01;
};

struct ForestGradients {
  std::vector<Eigen::MatrixXd> routing_weights;
  std::vector<Eigen::VectorXd> routing_bias;
  std::vector<Eigen::MatrixXd> leaf_logits;
};

struct Prediction {
  int label = 0;
  Eigen::VectorXd probabilities;
};

/// Ensemble of soft decision trees trained end to end by SGD.
class ForestModel {
 public:
  ForestModel() = default;

  /// Random init: each tree draws ceil(subset_fraction * num_features)
  /// distinct feature indices; routing weights ~ N(0, 1/subset_size); leaf
  /// logits zero. Deterministic given seed.
  static ForestModel init(int num_features, int num_classes,
                          const ForestHyperparams& hp, std::uint64_t seed);

  /// Mean of the per-tree class distributions; sums to 1.
  [[nodiscard]] Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

  /// Mean negative log-likelihood over the batch plus exact analytic
  /// gradients for every routing weight, bias, and leaf logit.
  [[nodiscard]] std::pair<double, ForestGradients> loss_and_grad(const Batch& batch) const;

  /// One SGD step on the whole batch (one epoch, mini-chunk = batch).
  void partial_fit(const Batch& batch);

  /// Argmax of forward() per sample, ties toward the lower class index.
  [[nodiscard]] std::vector<Prediction> predict(const Batch& batch) const;

  [[nodiscard]] int num_features() const { return num_features_; }
  [[nodiscard]] int num_classes() const { return num_classes_; }
  [[nodiscard]] const ForestHyperparams& hyperparams() const { return hp_; }
  [[nodiscard]] const std::vector<TreeModel>& trees() const { return trees_; }

  /// Flat view of all parameters, tree-major; set_parameters inverts it.
  [[nodiscard]] Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);

  /// Versioned checkpoint; round-trip is bit-exact.
  void save(std::ostream& out) const;
  static ForestModel load(std::istream& in);

 private:
  int num_features_ = 0;
  int num_classes_ = 0;
  ForestHyperparams hp_;
  std::vector<TreeModel> trees_;
};

}  // namespace tril3

#endif  // TRIL3_NDF_HPP
