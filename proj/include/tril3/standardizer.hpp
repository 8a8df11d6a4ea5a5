#ifndef TRIL3_STANDARDIZER_HPP
#define TRIL3_STANDARDIZER_HPP

#include <Eigen/Dense>

#include "tril3/sample.hpp"

namespace tril3 {

/// Streaming per-feature moments (Welford). Variance is the population
/// estimate m2 / count.
class RunningMoments {
 public:
  RunningMoments() = default;

  /// Folds every sample of the batch into the moments. An empty state adopts
  /// the batch's feature dimension.
  void update(const Batch& batch);

  /// Returns a copy of the batch with each feature mapped to
  /// (x - mean) / std. Features with std below 1e-12 are only centered.
  [[nodiscard]] Batch transform(const Batch& batch) const;

  [[nodiscard]] Eigen::VectorXd transform(const Eigen::VectorXd& x) const;

  [[nodiscard]] long count() const { return count_; }
  [[nodiscard]] const Eigen::VectorXd& mean() const { return mean_; }
  [[nodiscard]] const Eigen::VectorXd& m2() const { return m2_; }
  [[nodiscard]] Eigen::VectorXd variance() const;
  [[nodiscard]] Eigen::Index dim() const { return mean_.size(); }

 private:
  long count_ = 0;
  Eigen::VectorXd mean_;
  Eigen::VectorXd m2_;
};

}  // namespace tril3

#endif  // TRIL3_STANDARDIZER_HPP
