#include "tril3/schedule.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace tril3 {

std::vector<Batch> schedule_batches(const std::vector<Sample>& train,
                                    const StreamSchedule& sched) {
  if (train.empty()) throw std::invalid_argument("schedule_batches: empty train set");
  if (sched.batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
  if (sched.forgetting_start > sched.forgetting_end)
    throw std::invalid_argument("forgetting_start must not exceed forgetting_end");

  if (sched.has_window()) {
    const bool present = std::any_of(train.begin(), train.end(), [&](const Sample& s) {
      return s.label && *s.label == sched.forgetting_class;
    });
    if (!present)
      throw std::invalid_argument(
          "forgetting_class is absent from the train set; window misconfigured");
  }

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(sched.shuffle_seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Batch> batches;
  Batch current;
  long batch_idx = 0;  // index the next emitted batch will carry
  for (std::size_t pos : order) {
    const Sample& s = train[pos];
    if (sched.in_window(batch_idx) && s.label && *s.label == sched.forgetting_class)
      continue;  // discarded, not re-queued
    current.samples.push_back(s);
    if (static_cast<int>(current.samples.size()) == sched.batch_size) {
      batches.push_back(std::move(current));
      current = Batch{};
      ++batch_idx;
    }
  }
  if (!current.samples.empty()) batches.push_back(std::move(current));
  return batches;
}

}  // namespace tril3
