#include "tril3/ilvq.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

namespace tril3 {

NearestTwo PrototypeStore::nearest_two(const Eigen::VectorXd& x) const {
  if (prototypes_.empty()) throw std::logic_error("nearest_two on empty store");
  NearestTwo result;
  double best = std::numeric_limits<double>::infinity();
  double second = std::numeric_limits<double>::infinity();
  std::size_t best_idx = 0, second_idx = 0;
  bool have_second = false;
  for (std::size_t i = 0; i < prototypes_.size(); ++i) {
    if (prototypes_[i].position.size() != x.size())
      throw std::invalid_argument("nearest_two: feature dimension mismatch");
    const double d = (prototypes_[i].position - x).norm();
    if (d < best) {
      if (i > 0) {
        second = best;
        second_idx = best_idx;
        have_second = true;
      }
      best = d;
      best_idx = i;
    } else if (d < second) {
      second = d;
      second_idx = i;
      have_second = true;
    }
  }
  result.winner = best_idx;
  result.d1 = best;
  if (have_second) {
    result.runner = second_idx;
    result.d2 = second;
  }
  return result;
}

double PrototypeStore::threshold(std::size_t idx) const {
  if (idx >= prototypes_.size()) throw std::out_of_range("threshold: bad prototype index");
  const Prototype& p = prototypes_[idx];
  double nearest_other = std::numeric_limits<double>::infinity();
  double farthest_same = -1.0;
  for (std::size_t i = 0; i < prototypes_.size(); ++i) {
    if (i == idx) continue;
    const double d = (prototypes_[i].position - p.position).norm();
    if (prototypes_[i].label != p.label)
      nearest_other = std::min(nearest_other, d);
    else
      farthest_same = std::max(farthest_same, d);
  }
  if (std::isfinite(nearest_other)) return nearest_other;
  if (farthest_same >= 0.0) return farthest_same;
  return std::numeric_limits<double>::infinity();
}

bool PrototypeStore::has_class(int label) const {
  return std::any_of(prototypes_.begin(), prototypes_.end(),
                     [label](const Prototype& p) { return p.label == label; });
}

long PrototypeStore::count_for_class(int label) const {
  return std::count_if(prototypes_.begin(), prototypes_.end(),
                       [label](const Prototype& p) { return p.label == label; });
}

std::vector<int> PrototypeStore::known_classes() const {
  std::vector<int> classes;
  for (const auto& [label, count] : class_counts()) classes.push_back(label);
  return classes;
}

std::map<int, long> PrototypeStore::class_counts() const {
  std::map<int, long> counts;
  for (const Prototype& p : prototypes_) ++counts[p.label];
  return counts;
}

InsertionReport PrototypeStore::learn_one(const Eigen::VectorXd& x, int label) {
  if (!x.allFinite()) throw std::invalid_argument("learn_one: non-finite sample");

  auto insert = [&] {
    prototypes_.push_back({x, label, 1, 0, true});
    return InsertionReport{true, 1};
  };

  if (prototypes_.empty() || !has_class(label)) return insert();

  const NearestTwo nn = nearest_two(x);
  const bool far_from_winner = nn.d1 > threshold(nn.winner);
  const bool far_from_runner = nn.runner && *nn.d2 > threshold(*nn.runner);
  if (far_from_winner || far_from_runner) return insert();

  Prototype& winner = prototypes_[nn.winner];
  if (winner.label == label) {
    winner.position +=
        (params_.learn_rate_winner / static_cast<double>(winner.win_count)) *
        (x - winner.position);
    winner.win_count += 1;
    winner.age = 0;
    winner.won_in_batch = true;
  } else {
    winner.position -= params_.learn_rate_runner * (x - winner.position);
  }
  if (nn.runner) {
    Prototype& runner = prototypes_[*nn.runner];
    if (runner.label == label)
      runner.position += params_.learn_rate_runner * (x - runner.position);
  }
  return InsertionReport{false, 0};
}

long PrototypeStore::end_batch_maintenance() {
  if (prototypes_.empty()) return 0;

  for (Prototype& p : prototypes_) {
    if (!p.won_in_batch) p.age += 1;
    p.won_in_batch = false;
  }

  // Store-wide median win count (lower median for even sizes).
  std::vector<long> wins;
  wins.reserve(prototypes_.size());
  for (const Prototype& p : prototypes_) wins.push_back(p.win_count);
  const std::size_t mid = (wins.size() - 1) / 2;
  std::nth_element(wins.begin(), wins.begin() + static_cast<long>(mid), wins.end());
  const long median_win = wins[mid];

  const std::size_t before = prototypes_.size();
  std::erase_if(prototypes_, [&](const Prototype& p) {
    return p.age > params_.age_limit && p.win_count < median_win;
  });

  // Trim classes over the cap, dropping lowest-win prototypes first.
  for (const auto& [label, count] : class_counts()) {
    long excess = count - params_.max_per_class;
    while (excess > 0) {
      std::size_t victim = prototypes_.size();
      long lowest = std::numeric_limits<long>::max();
      for (std::size_t i = 0; i < prototypes_.size(); ++i) {
        if (prototypes_[i].label == label && prototypes_[i].win_count < lowest) {
          lowest = prototypes_[i].win_count;
          victim = i;
        }
      }
      prototypes_.erase(prototypes_.begin() + static_cast<long>(victim));
      --excess;
    }
  }
  return static_cast<long>(before - prototypes_.size());
}

std::vector<Sample> PrototypeStore::generate(int label, long n, std::uint64_t seed,
                                             double jitter_sigma) const {
  if (n < 0) throw std::invalid_argument("generate: negative sample count");
  std::vector<const Prototype*> pool;
  for (const Prototype& p : prototypes_)
    if (p.label == label) pool.push_back(&p);
  if (pool.empty())
    throw std::invalid_argument("generate: no prototype of class " + std::to_string(label));

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::normal_distribution<double> noise(0.0, jitter_sigma);

  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    Eigen::VectorXd pos = pool[pick(rng)]->position;
    if (jitter_sigma > 0.0)
      for (Eigen::Index j = 0; j < pos.size(); ++j) pos[j] += noise(rng);
    out.push_back({std::move(pos), label});
  }
  return out;
}

void PrototypeStore::dump_csv(std::ostream& out) const {
  const Eigen::Index dim = prototypes_.empty() ? 0 : prototypes_.front().position.size();
  out << "label,win_count,age";
  for (Eigen::Index j = 0; j < dim; ++j) out << ",x" << j;
  out << "\n";
  out.precision(17);
  for (const Prototype& p : prototypes_) {
    out << p.label << ',' << p.win_count << ',' << p.age;
    for (Eigen::Index j = 0; j < p.position.size(); ++j) out << ',' << p.position[j];
    out << "\n";
  }
}

}  // namespace tril3
