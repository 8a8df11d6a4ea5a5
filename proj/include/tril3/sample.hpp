#ifndef TRIL3_SAMPLE_HPP
#define TRIL3_SAMPLE_HPP

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <vector>

namespace tril3 {

/// A single observation: feature vector plus optional class label.
struct Sample {
  Eigen::VectorXd features;
  std::optional<int> label;
};

enum class BatchOrigin { real, synthetic, mixed };

/// An ordered group of samples flowing through the stream.
struct Batch {
  std::vector<Sample> samples;
  BatchOrigin origin = BatchOrigin::real;

  [[nodiscard]] bool empty() const { return samples.empty(); }
  [[nodiscard]] std::size_t size() const { return samples.size(); }

  /// Feature dimension shared by all samples. Throws on an empty batch.
  [[nodiscard]] Eigen::Index feature_dim() const {
    if (samples.empty()) throw std::invalid_argument("feature_dim of empty batch");
    return samples.front().features.size();
  }
};

}  // namespace tril3

#endif  // TRIL3_SAMPLE_HPP
