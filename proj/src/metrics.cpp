#include "tril3/metrics.hpp"

#include <stdexcept>

namespace tril3 {

Eigen::VectorXd f1_per_class(const std::vector<int>& predictions,
                             const std::vector<int>& truths, int num_classes) {
  if (predictions.size() != truths.size())
    throw std::invalid_argument("f1_per_class: length mismatch");
  if (num_classes <= 0) throw std::invalid_argument("f1_per_class: num_classes must be positive");

  Eigen::VectorXd tp = Eigen::VectorXd::Zero(num_classes);
  Eigen::VectorXd fp = Eigen::VectorXd::Zero(num_classes);
  Eigen::VectorXd fn = Eigen::VectorXd::Zero(num_classes);
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const int y = truths[i];
    const int yhat = predictions[i];
    if (y < 0 || y >= num_classes || yhat < 0 || yhat >= num_classes)
      throw std::invalid_argument("f1_per_class: label out of range");
    if (yhat == y) {
      tp[y] += 1.0;
    } else {
      fp[yhat] += 1.0;
      fn[y] += 1.0;
    }
  }

  Eigen::VectorXd f1 = Eigen::VectorXd::Zero(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    const double precision = (tp[c] + fp[c]) > 0.0 ? tp[c] / (tp[c] + fp[c]) : 0.0;
    const double recall = (tp[c] + fn[c]) > 0.0 ? tp[c] / (tp[c] + fn[c]) : 0.0;
    f1[c] = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  }
  return f1;
}

PhaseSummary summarize_phases(const MetricsTimeline& timeline, long forgetting_start,
                              long forgetting_end) {
  if (timeline.records.empty()) throw std::invalid_argument("summarize_phases: empty timeline");
  const Eigen::Index k = timeline.records.front().f1.size();
  Eigen::VectorXd before = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd during = Eigen::VectorXd::Zero(k);
  long n_before = 0, n_during = 0;
  for (const BatchRecord& r : timeline.records) {
    if (r.batch_idx < forgetting_start) {
      before += r.f1;
      ++n_before;
    } else if (r.batch_idx < forgetting_end) {
      during += r.f1;
      ++n_during;
    }
  }
  if (n_before == 0 || n_during == 0)
    throw std::invalid_argument("summarize_phases: a phase holds no evaluation point");
  return {before / static_cast<double>(n_before), during / static_cast<double>(n_during)};
}

}  // namespace tril3
