#include "tril3/standardizer.hpp"

#include <cmath>
#include <stdexcept>

namespace tril3 {

namespace {
constexpr double kStdFloor = 1e-12;
}

void RunningMoments::update(const Batch& batch) {
  if (batch.empty()) return;
  const Eigen::Index dim = batch.feature_dim();
  if (count_ == 0 && mean_.size() == 0) {
    mean_ = Eigen::VectorXd::Zero(dim);
    m2_ = Eigen::VectorXd::Zero(dim);
  }
  if (dim != mean_.size())
    throw std::invalid_argument("RunningMoments::update: feature dimension mismatch");

  for (const Sample& s : batch.samples) {
    if (s.features.size() != dim)
      throw std::invalid_argument("RunningMoments::update: inconsistent sample dimension");
    ++count_;
    const Eigen::VectorXd delta = s.features - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta.cwiseProduct(s.features - mean_);
  }
}

Eigen::VectorXd RunningMoments::variance() const {
  if (count_ == 0) return Eigen::VectorXd();
  return m2_ / static_cast<double>(count_);
}

Eigen::VectorXd RunningMoments::transform(const Eigen::VectorXd& x) const {
  if (count_ < 1)
    throw std::logic_error("RunningMoments::transform called before any update");
  if (x.size() != mean_.size())
    throw std::invalid_argument("RunningMoments::transform: feature dimension mismatch");
  Eigen::VectorXd std_dev = (m2_ / static_cast<double>(count_)).cwiseSqrt();
  // Constant features are only centered.
  std_dev = (std_dev.array() < kStdFloor).select(1.0, std_dev);
  return (x - mean_).cwiseQuotient(std_dev);
}

Batch RunningMoments::transform(const Batch& batch) const {
  Batch out;
  out.origin = batch.origin;
  out.samples.reserve(batch.size());
  for (const Sample& s : batch.samples)
    out.samples.push_back({transform(s.features), s.label});
  return out;
}

}  // namespace tril3
