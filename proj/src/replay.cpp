#include "tril3/replay.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace tril3 {

long ReplayBuffer::quota(int label) const {
  const long k = static_cast<long>(seen_counts_.size());
  if (k == 0) return 0;
  const long base = capacity_ / k;
  const long rem = capacity_ % k;
  long rank = 0;
  for (const auto& [c, n] : seen_counts_) {
    if (c == label) break;
    ++rank;
  }
  return base + (rank < rem ? 1 : 0);
}

void ReplayBuffer::rebalance() {
  for (auto& [label, reservoir] : slots_) {
    const long q = quota(label);
    while (static_cast<long>(reservoir.size()) > q) {
      std::uniform_int_distribution<std::size_t> pick(0, reservoir.size() - 1);
      reservoir.erase(reservoir.begin() + static_cast<long>(pick(rng_)));
    }
  }
}

void ReplayBuffer::update(const Batch& batch) {
  for (const Sample& s : batch.samples) {
    if (!s.label) throw std::invalid_argument("ReplayBuffer::update: unlabeled sample");
    const int c = *s.label;
    const bool new_class = seen_counts_.find(c) == seen_counts_.end();
    ++seen_counts_[c];
    if (new_class) rebalance();

    auto& reservoir = slots_[c];
    const long q = quota(c);
    if (static_cast<long>(reservoir.size()) < q) {
      reservoir.push_back(s);
    } else if (q > 0) {
      // Reservoir sampling within the class stream.
      std::uniform_int_distribution<long> pick(0, seen_counts_[c] - 1);
      const long j = pick(rng_);
      if (j < q) reservoir[static_cast<std::size_t>(j)] = s;
    }
  }
}

long ReplayBuffer::stored() const {
  long total = 0;
  for (const auto& [label, reservoir] : slots_) total += static_cast<long>(reservoir.size());
  return total;
}

std::map<int, long> ReplayBuffer::class_counts() const {
  std::map<int, long> counts;
  for (const auto& [label, reservoir] : slots_)
    counts[label] = static_cast<long>(reservoir.size());
  return counts;
}

std::vector<Sample> ReplayBuffer::draw(long n, std::uint64_t seed) const {
  std::vector<Sample> all;
  for (const auto& [label, reservoir] : slots_)
    all.insert(all.end(), reservoir.begin(), reservoir.end());
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  if (static_cast<long>(all.size()) > n) all.resize(static_cast<std::size_t>(std::max(n, 0L)));
  return all;
}

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

}  // namespace

MlpModel MlpModel::init(int num_features, int num_classes, const MlpHyperparams& hp,
                        std::uint64_t seed) {
  if (num_features <= 0 || num_classes <= 0 || hp.hidden <= 0)
    throw std::invalid_argument("MlpModel::init: counts must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d1(0.0, 1.0 / std::sqrt(num_features));
  std::normal_distribution<double> d2(0.0, 1.0 / std::sqrt(hp.hidden));

  MlpModel m;
  m.hp_ = hp;
  m.w1_.resize(hp.hidden, num_features);
  for (Eigen::Index i = 0; i < m.w1_.rows(); ++i)
    for (Eigen::Index j = 0; j < m.w1_.cols(); ++j) m.w1_(i, j) = d1(rng);
  m.b1_ = Eigen::VectorXd::Zero(hp.hidden);
  m.w2_.resize(num_classes, hp.hidden);
  for (Eigen::Index i = 0; i < m.w2_.rows(); ++i)
    for (Eigen::Index j = 0; j < m.w2_.cols(); ++j) m.w2_(i, j) = d2(rng);
  m.b2_ = Eigen::VectorXd::Zero(num_classes);
  m.vw1_ = Eigen::MatrixXd::Zero(m.w1_.rows(), m.w1_.cols());
  m.vw2_ = Eigen::MatrixXd::Zero(m.w2_.rows(), m.w2_.cols());
  m.vb1_ = Eigen::VectorXd::Zero(m.b1_.size());
  m.vb2_ = Eigen::VectorXd::Zero(m.b2_.size());
  return m;
}

Eigen::VectorXd MlpModel::forward(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd h = (w1_ * x + b1_).cwiseMax(0.0);
  return softmax(w2_ * h + b2_);
}

std::pair<double, MlpGradients> MlpModel::loss_and_grad(const Batch& batch) const {
  if (batch.empty()) throw std::invalid_argument("MlpModel::loss_and_grad: empty batch");
  MlpGradients g;
  g.w1 = Eigen::MatrixXd::Zero(w1_.rows(), w1_.cols());
  g.w2 = Eigen::MatrixXd::Zero(w2_.rows(), w2_.cols());
  g.b1 = Eigen::VectorXd::Zero(b1_.size());
  g.b2 = Eigen::VectorXd::Zero(b2_.size());

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const Sample& s : batch.samples) {
    if (!s.label) throw std::invalid_argument("MlpModel::loss_and_grad: unlabeled sample");
    const int y = *s.label;
    if (y < 0 || y >= num_classes())
      throw std::invalid_argument("MlpModel::loss_and_grad: label out of range");

    const Eigen::VectorXd pre = w1_ * s.features + b1_;
    const Eigen::VectorXd h = pre.cwiseMax(0.0);
    const Eigen::VectorXd p = softmax(w2_ * h + b2_);
    loss += -std::log(p[y]) * inv_n;

    Eigen::VectorXd dz = p * inv_n;
    dz[y] -= inv_n;
    g.w2 += dz * h.transpose();
    g.b2 += dz;
    Eigen::VectorXd dh = w2_.transpose() * dz;
    dh = (pre.array() > 0.0).select(dh, 0.0);
    g.w1 += dh * s.features.transpose();
    g.b1 += dh;
  }
  return {loss, std::move(g)};
}

void MlpModel::momentum_step(const MlpGradients& grads) {
  vw1_ = hp_.momentum * vw1_ - hp_.learning_rate * grads.w1;
  vb1_ = hp_.momentum * vb1_ - hp_.learning_rate * grads.b1;
  vw2_ = hp_.momentum * vw2_ - hp_.learning_rate * grads.w2;
  vb2_ = hp_.momentum * vb2_ - hp_.learning_rate * grads.b2;
  w1_ += vw1_;
  b1_ += vb1_;
  w2_ += vw2_;
  b2_ += vb2_;
}

std::vector<Prediction> MlpModel::predict(const Batch& batch) const {
  std::vector<Prediction> out;
  out.reserve(batch.size());
  for (const Sample& s : batch.samples) {
    Eigen::VectorXd p = forward(s.features);
    int best = 0;
    for (int k = 1; k < num_classes(); ++k)
      if (p[k] > p[best]) best = k;
    out.push_back({best, std::move(p)});
  }
  return out;
}

Eigen::VectorXd MlpModel::parameters() const {
  Eigen::VectorXd flat(w1_.size() + b1_.size() + w2_.size() + b2_.size());
  Eigen::Index at = 0;
  flat.segment(at, w1_.size()) = Eigen::Map<const Eigen::VectorXd>(w1_.data(), w1_.size());
  at += w1_.size();
  flat.segment(at, b1_.size()) = b1_;
  at += b1_.size();
  flat.segment(at, w2_.size()) = Eigen::Map<const Eigen::VectorXd>(w2_.data(), w2_.size());
  at += w2_.size();
  flat.segment(at, b2_.size()) = b2_;
  return flat;
}

void MlpModel::set_parameters(const Eigen::VectorXd& flat) {
  Eigen::Index at = 0;
  Eigen::Map<Eigen::VectorXd>(w1_.data(), w1_.size()) = flat.segment(at, w1_.size());
  at += w1_.size();
  b1_ = flat.segment(at, b1_.size());
  at += b1_.size();
  Eigen::Map<Eigen::VectorXd>(w2_.data(), w2_.size()) = flat.segment(at, w2_.size());
  at += w2_.size();
  b2_ = flat.segment(at, b2_.size());
  at += b2_.size();
  if (at != flat.size()) throw std::invalid_argument("set_parameters: size mismatch");
}

void MlpModel::save(std::ostream& out) const {
  nlohmann::json j;
  j["format"] = "mlp-checkpoint-v1";
  j["num_features"] = num_features();
  j["num_classes"] = num_classes();
  j["hidden"] = hp_.hidden;
  j["learning_rate"] = hp_.learning_rate;
  j["momentum"] = hp_.momentum;
  const Eigen::VectorXd flat = parameters();
  j["parameters"] = std::vector<double>(flat.data(), flat.data() + flat.size());
  auto vel = [](const Eigen::MatrixXd& m) {
    return std::vector<double>(m.data(), m.data() + m.size());
  };
  j["velocity_w1"] = vel(vw1_);
  j["velocity_w2"] = vel(vw2_);
  j["velocity_b1"] = std::vector<double>(vb1_.data(), vb1_.data() + vb1_.size());
  j["velocity_b2"] = std::vector<double>(vb2_.data(), vb2_.data() + vb2_.size());
  out << j.dump();
}

MlpModel MlpModel::load(std::istream& in) {
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.at("format").get<std::string>() != "mlp-checkpoint-v1")
    throw std::runtime_error("unrecognized mlp checkpoint format");
  MlpHyperparams hp;
  hp.hidden = j.at("hidden").get<int>();
  hp.learning_rate = j.at("learning_rate").get<double>();
  hp.momentum = j.at("momentum").get<double>();
  MlpModel m = init(j.at("num_features").get<int>(), j.at("num_classes").get<int>(), hp, 0);
  const auto flat = j.at("parameters").get<std::vector<double>>();
  m.set_parameters(Eigen::Map<const Eigen::VectorXd>(
      flat.data(), static_cast<Eigen::Index>(flat.size())));
  auto load_mat = [&](const char* key, Eigen::MatrixXd& dst) {
    const auto v = j.at(key).get<std::vector<double>>();
    Eigen::Map<Eigen::VectorXd>(dst.data(), dst.size()) =
        Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  };
  load_mat("velocity_w1", m.vw1_);
  load_mat("velocity_w2", m.vw2_);
  const auto b1 = j.at("velocity_b1").get<std::vector<double>>();
  m.vb1_ = Eigen::Map<const Eigen::VectorXd>(b1.data(), static_cast<Eigen::Index>(b1.size()));
  const auto b2 = j.at("velocity_b2").get<std::vector<double>>();
  m.vb2_ = Eigen::Map<const Eigen::VectorXd>(b2.data(), static_cast<Eigen::Index>(b2.size()));
  return m;
}

void replay_train_step(MlpModel& mlp, const ReplayBuffer& buf, const Batch& batch,
                       std::uint64_t seed) {
  if (batch.empty()) throw std::invalid_argument("replay_train_step: empty batch");
  Batch chunk;
  chunk.origin = BatchOrigin::mixed;
  chunk.samples = batch.samples;
  const long draw_n = std::min<long>(static_cast<long>(batch.size()), buf.stored());
  auto replayed = buf.draw(draw_n, seed);
  chunk.samples.insert(chunk.samples.end(), std::make_move_iterator(replayed.begin()),
                       std::make_move_iterator(replayed.end()));
  const auto [loss, grads] = mlp.loss_and_grad(chunk);
  (void)loss;
  mlp.momentum_step(grads);
}

OfflineForest offline_fit(const ForestHyperparams& hp, const std::vector<Sample>& train,
                          int num_classes, int epochs, int mini_batch, std::uint64_t seed) {
  if (train.empty()) throw std::invalid_argument("offline_fit: empty train set");
  if (mini_batch <= 0) throw std::invalid_argument("offline_fit: mini_batch must be positive");

  OfflineForest model;
  Batch all;
  all.samples = train;
  model.scaler.update(all);
  const Batch standardized = model.scaler.transform(all);

  const int num_features = static_cast<int>(standardized.feature_dim());
  model.forest = ForestModel::init(num_features, num_classes, hp, seed);

  std::mt19937_64 rng(seed + 1);
  std::vector<std::size_t> order(standardized.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(mini_batch)) {
      Batch mb;
      const std::size_t end = std::min(order.size(), at + static_cast<std::size_t>(mini_batch));
      for (std::size_t i = at; i < end; ++i)
        mb.samples.push_back(standardized.samples[order[i]]);
      model.forest.partial_fit(mb);
    }
  }
  return model;
}

}  // namespace tril3
