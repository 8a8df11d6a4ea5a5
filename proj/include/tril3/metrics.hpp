#ifndef TRIL3_METRICS_HPP
#define TRIL3_METRICS_HPP

#include <Eigen/Dense>
#include <vector>

namespace tril3 {

/// One-vs-rest F1 per class from confusion counts; 0/0 yields 0.
Eigen::VectorXd f1_per_class(const std::vector<int>& predictions,
                             const std::vector<int>& truths, int num_classes);

struct BatchRecord {
  long batch_idx = 0;
  Eigen::VectorXd f1;                    // per class
  std::vector<long> prototype_counts;    // per class; empty for non-prototype strategies
  bool retrained = false;
  double millis = 0.0;
};

struct MetricsTimeline {
  std::vector<BatchRecord> records;
};

/// Per-class mean F1 before the forgetting window and inside it.
struct PhaseSummary {
  Eigen::VectorXd before_mean;
  Eigen::VectorXd during_mean;
};

/// Means over records with batch_idx < forgetting_start (before) and
/// batch_idx in [forgetting_start, forgetting_end) (during). Throws if
/// either phase holds no evaluation point.
PhaseSummary summarize_phases(const MetricsTimeline& timeline, long forgetting_start,
                              long forgetting_end);

}  // namespace tril3

#endif  // TRIL3_METRICS_HPP
