#include "tril3/ndf.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace tril3 {
namespace {

// log(sigmoid(a)) and log(1 - sigmoid(a)), stable for large |a|.
double log_sigmoid(double a) { return a >= 0.0 ? -std::log1p(std::exp(-a)) : a - std::log1p(std::exp(a)); }

double sigmoid(double a) {
  return a >= 0.0 ? 1.0 / (1.0 + std::exp(-a)) : std::exp(a) / (1.0 + std::exp(a));
}

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

// Row-wise softmax of the leaf logits.
Eigen::MatrixXd leaf_distributions(const TreeModel& tree) {
  Eigen::MatrixXd pi(tree.leaf_logits.rows(), tree.leaf_logits.cols());
  for (Eigen::Index l = 0; l < pi.rows(); ++l)
    pi.row(l) = softmax(tree.leaf_logits.row(l).transpose()).transpose();
  return pi;
}

Eigen::VectorXd subset_view(const TreeModel& tree, const Eigen::VectorXd& x) {
  Eigen::VectorXd xs(static_cast<Eigen::Index>(tree.feature_subset.size()));
  for (std::size_t j = 0; j < tree.feature_subset.size(); ++j) {
    const int f = tree.feature_subset[j];
    if (f < 0 || f >= x.size())
      throw std::invalid_argument("tree feature subset index out of range for input");
    xs[static_cast<Eigen::Index>(j)] = x[f];
  }
  return xs;
}

struct TreePass {
  Eigen::VectorXd decisions;  // sigmoid per internal node
  Eigen::VectorXd mu;         // per leaf
};

// Heap layout: node i has children 2i+1 (left, prob d) and 2i+2 (right,
// prob 1-d); leaves occupy heap slots [num_nodes, num_nodes + num_leaves).
// Reach probabilities accumulate in log space.
TreePass routing_pass(const TreeModel& tree, const Eigen::VectorXd& x) {
  const Eigen::Index n_nodes = tree.num_nodes();
  const Eigen::Index n_leaves = tree.num_leaves();
  const Eigen::VectorXd xs = subset_view(tree, x);
  const Eigen::VectorXd activations = tree.routing_weights * xs + tree.routing_bias;

  TreePass pass;
  pass.decisions.resize(n_nodes);
  Eigen::VectorXd log_reach = Eigen::VectorXd::Zero(n_nodes + n_leaves);
  for (Eigen::Index i = 0; i < n_nodes; ++i) {
    const double a = activations[i];
    pass.decisions[i] = sigmoid(a);
    log_reach[2 * i + 1] = log_reach[i] + log_sigmoid(a);
    log_reach[2 * i + 2] = log_reach[i] + log_sigmoid(-a);
  }
  pass.mu = log_reach.tail(n_leaves).array().exp();
  return pass;
}

}  // namespace

Eigen::VectorXd leaf_reach_probabilities(const TreeModel& tree, const Eigen::VectorXd& x) {
  return routing_pass(tree, x).mu;
}

Eigen::VectorXd tree_forward(const TreeModel& tree, const Eigen::VectorXd& x) {
  return leaf_distributions(tree).transpose() * routing_pass(tree, x).mu;
}

ForestModel ForestModel::init(int num_features, int num_classes,
                              const ForestHyperparams& hp, std::uint64_t seed) {
  if (num_features <= 0 || num_classes <= 0 || hp.num_trees <= 0 || hp.depth <= 0)
    throw std::invalid_argument("ForestModel::init: counts must be positive");
  if (hp.subset_fraction <= 0.0 || hp.subset_fraction > 1.0)
    throw std::invalid_argument("ForestModel::init: subset_fraction must be in (0,1]");
  if (hp.learning_rate <= 0.0)
    throw std::invalid_argument("ForestModel::init: learning_rate must be positive");

  const int subset_size = static_cast<int>(
      std::ceil(hp.subset_fraction * static_cast<double>(num_features)));
  const Eigen::Index n_nodes = (Eigen::Index{1} << hp.depth) - 1;
  const Eigen::Index n_leaves = Eigen::Index{1} << hp.depth;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> weight_dist(0.0, 1.0 / std::sqrt(subset_size));

  ForestModel model;
  model.num_features_ = num_features;
  model.num_classes_ = num_classes;
  model.hp_ = hp;
  model.trees_.reserve(static_cast<std::size_t>(hp.num_trees));
  for (int t = 0; t < hp.num_trees; ++t) {
    TreeModel tree;
    tree.depth = hp.depth;
    std::vector<int> all(static_cast<std::size_t>(num_features));
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    tree.feature_subset.assign(all.begin(), all.begin() + subset_size);
    tree.routing_weights.resize(n_nodes, subset_size);
    for (Eigen::Index i = 0; i < n_nodes; ++i)
      for (Eigen::Index j = 0; j < subset_size; ++j)
        tree.routing_weights(i, j) = weight_dist(rng);
    tree.routing_bias = Eigen::VectorXd::Zero(n_nodes);
    tree.leaf_logits = Eigen::MatrixXd::Zero(n_leaves, num_classes);
    model.trees_.push_back(std::move(tree));
  }
  return model;
}

Eigen::VectorXd ForestModel::forward(const Eigen::VectorXd& x) const {
  if (trees_.empty()) throw std::logic_error("forward on uninitialized forest");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(num_classes_);
  for (const TreeModel& tree : trees_) acc += tree_forward(tree, x);
  return acc / static_cast<double>(trees_.size());
}

std::pair<double, ForestGradients> ForestModel::loss_and_grad(const Batch& batch) const {
  if (batch.empty()) throw std::invalid_argument("loss_and_grad: empty batch");
  const std::size_t n_trees = trees_.size();
  const auto n_samples = static_cast<double>(batch.size());

  ForestGradients grads;
  grads.routing_weights.reserve(n_trees);
  grads.routing_bias.reserve(n_trees);
  grads.leaf_logits.reserve(n_trees);
  std::vector<Eigen::MatrixXd> pis;
  pis.reserve(n_trees);
  for (const TreeModel& tree : trees_) {
    grads.routing_weights.push_back(
        Eigen::MatrixXd::Zero(tree.routing_weights.rows(), tree.routing_weights.cols()));
    grads.routing_bias.push_back(Eigen::VectorXd::Zero(tree.num_nodes()));
    grads.leaf_logits.push_back(
        Eigen::MatrixXd::Zero(tree.num_leaves(), num_classes_));
    pis.push_back(leaf_distributions(tree));
  }

  double total_loss = 0.0;
  std::vector<TreePass> passes(n_trees);
  for (const Sample& s : batch.samples) {
    if (!s.label) throw std::invalid_argument("loss_and_grad: unlabeled sample");
    const int y = *s.label;
    if (y < 0 || y >= num_classes_)
      throw std::invalid_argument("loss_and_grad: label out of range");

    Eigen::VectorXd p = Eigen::VectorXd::Zero(num_classes_);
    for (std::size_t t = 0; t < n_trees; ++t) {
      passes[t] = routing_pass(trees_[t], s.features);
      p += pis[t].transpose() * passes[t].mu;
    }
    p /= static_cast<double>(n_trees);
    total_loss += -std::log(p[y]);

    const double coef = -1.0 / (p[y] * static_cast<double>(n_trees) * n_samples);
    for (std::size_t t = 0; t < n_trees; ++t) {
      const TreeModel& tree = trees_[t];
      const Eigen::MatrixXd& pi = pis[t];
      const Eigen::VectorXd& mu = passes[t].mu;
      const Eigen::VectorXd& d = passes[t].decisions;
      const Eigen::Index n_nodes = tree.num_nodes();
      const Eigen::Index n_leaves = tree.num_leaves();

      // Leaf logits: dL/dz_{l,k} = coef * mu_l * pi_{l,y} * (1[k==y] - pi_{l,k}).
      for (Eigen::Index l = 0; l < n_leaves; ++l) {
        const double common = coef * mu[l] * pi(l, y);
        grads.leaf_logits[t].row(l) -= common * pi.row(l);
        grads.leaf_logits[t](l, y) += common;
      }

      // Routing: subtree sums of mu_l * dL/dmu_l, accumulated bottom-up.
      Eigen::VectorXd subtree = Eigen::VectorXd::Zero(n_nodes + n_leaves);
      for (Eigen::Index l = 0; l < n_leaves; ++l)
        subtree[n_nodes + l] = coef * mu[l] * pi(l, y);
      for (Eigen::Index i = n_nodes - 1; i >= 0; --i)
        subtree[i] = subtree[2 * i + 1] + subtree[2 * i + 2];

      const Eigen::VectorXd xs = subset_view(tree, s.features);
      for (Eigen::Index i = 0; i < n_nodes; ++i) {
        const double da = subtree[2 * i + 1] * (1.0 - d[i]) - subtree[2 * i + 2] * d[i];
        grads.routing_weights[t].row(i) += da * xs.transpose();
        grads.routing_bias[t][i] += da;
      }
    }
  }
  return {total_loss / n_samples, std::move(grads)};
}

void ForestModel::partial_fit(const Batch& batch) {
  if (batch.empty()) throw std::invalid_argument("partial_fit: empty batch");
  const auto [loss, grads] = loss_and_grad(batch);
  (void)loss;
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    trees_[t].routing_weights -= hp_.learning_rate * grads.routing_weights[t];
    trees_[t].routing_bias -= hp_.learning_rate * grads.routing_bias[t];
    trees_[t].leaf_logits -= hp_.learning_rate * grads.leaf_logits[t];
  }
}

std::vector<Prediction> ForestModel::predict(const Batch& batch) const {
  std::vector<Prediction> out;
  out.reserve(batch.size());
  for (const Sample& s : batch.samples) {
    Eigen::VectorXd p = forward(s.features);
    int best = 0;
    for (int k = 1; k < num_classes_; ++k)
      if (p[k] > p[best]) best = k;  // ties keep the lower class index
    out.push_back({best, std::move(p)});
  }
  return out;
}

Eigen::VectorXd ForestModel::parameters() const {
  Eigen::Index total = 0;
  for (const TreeModel& t : trees_)
    total += t.routing_weights.size() + t.routing_bias.size() + t.leaf_logits.size();
  Eigen::VectorXd flat(total);
  Eigen::Index at = 0;
  for (const TreeModel& t : trees_) {
    flat.segment(at, t.routing_weights.size()) =
        Eigen::Map<const Eigen::VectorXd>(t.routing_weights.data(), t.routing_weights.size());
    at += t.routing_weights.size();
    flat.segment(at, t.routing_bias.size()) = t.routing_bias;
    at += t.routing_bias.size();
    flat.segment(at, t.leaf_logits.size()) =
        Eigen::Map<const Eigen::VectorXd>(t.leaf_logits.data(), t.leaf_logits.size());
    at += t.leaf_logits.size();
  }
  return flat;
}

void ForestModel::set_parameters(const Eigen::VectorXd& flat) {
  Eigen::Index at = 0;
  for (TreeModel& t : trees_) {
    Eigen::Map<Eigen::VectorXd>(t.routing_weights.data(), t.routing_weights.size()) =
        flat.segment(at, t.routing_weights.size());
    at += t.routing_weights.size();
    t.routing_bias = flat.segment(at, t.routing_bias.size());
    at += t.routing_bias.size();
    Eigen::Map<Eigen::VectorXd>(t.leaf_logits.data(), t.leaf_logits.size()) =
        flat.segment(at, t.leaf_logits.size());
    at += t.leaf_logits.size();
  }
  if (at != flat.size())
    throw std::invalid_argument("set_parameters: size mismatch");
}

void ForestModel::save(std::ostream& out) const {
  nlohmann::json j;
  j["format"] = "ndf-checkpoint-v1";
  j["num_features"] = num_features_;
  j["num_classes"] = num_classes_;
  j["num_trees"] = hp_.num_trees;
  j["depth"] = hp_.depth;
  j["subset_fraction"] = hp_.subset_fraction;
  j["learning_rate"] = hp_.learning_rate;
  nlohmann::json subsets = nlohmann::json::array();
  for (const TreeModel& t : trees_) subsets.push_back(t.feature_subset);
  j["feature_subsets"] = std::move(subsets);
  const Eigen::VectorXd flat = parameters();
  j["parameters"] = std::vector<double>(flat.data(), flat.data() + flat.size());
  out << j.dump();
}

ForestModel ForestModel::load(std::istream& in) {
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.at("format").get<std::string>() != "ndf-checkpoint-v1")
    throw std::runtime_error("unrecognized forest checkpoint format");
  ForestHyperparams hp;
  hp.num_trees = j.at("num_trees").get<int>();
  hp.depth = j.at("depth").get<int>();
  hp.subset_fraction = j.at("subset_fraction").get<double>();
  hp.learning_rate = j.at("learning_rate").get<double>();
  ForestModel model = init(j.at("num_features").get<int>(),
                           j.at("num_classes").get<int>(), hp, /*seed=*/0);
  const auto subsets = j.at("feature_subsets").get<std::vector<std::vector<int>>>();
  for (std::size_t t = 0; t < model.trees_.size(); ++t)
    model.trees_[t].feature_subset = subsets.at(t);
  const auto flat = j.at("parameters").get<std::vector<double>>();
  model.set_parameters(Eigen::Map<const Eigen::VectorXd>(
      flat.data(), static_cast<Eigen::Index>(flat.size())));
  return model;
}

}  // namespace tril3
