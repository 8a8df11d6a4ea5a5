#ifndef TRIL3_SCHEDULE_HPP
#define TRIL3_SCHEDULE_HPP

#include <cstdint>
#include <vector>

#include "tril3/sample.hpp"

namespace tril3 {

/// Ordered batch plan over a training set. Batches whose index falls in
/// [forgetting_start, forgetting_end) omit every sample of forgetting_class;
/// skipped samples are discarded, never re-queued. forgetting_start ==
/// forgetting_end disables the window.
struct StreamSchedule {
  int batch_size = 32;
  int forgetting_class = 1;
  long forgetting_start = 0;
  long forgetting_end = 0;
  std::uint64_t shuffle_seed = 0;

  [[nodiscard]] bool has_window() const { return forgetting_start < forgetting_end; }
  [[nodiscard]] bool in_window(long batch_idx) const {
    return batch_idx >= forgetting_start && batch_idx < forgetting_end;
  }
};

/// Shuffles the train set with shuffle_seed and cuts it into batches of
/// batch_size (last may be smaller). Batches emptied entirely by the
/// forgetting window are dropped; emitted batch indices stay contiguous.
std::vector<Batch> schedule_batches(const std::vector<Sample>& train,
                                    const StreamSchedule& sched);

}  // namespace tril3

#endif  // TRIL3_SCHEDULE_HPP
