#ifndef TRIL3_TESTS_SUPPORT_HPP
#define TRIL3_TESTS_SUPPORT_HPP

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "tril3/sample.hpp"

namespace tril3::testing {

/// Seeded binary stream: class 0 ~ N(+center, I), class 1 ~ N(-center, I),
/// alternating labels so every prefix is roughly balanced.
inline std::vector<Sample> two_gaussians(std::size_t n, std::uint64_t seed,
                                         double center = 1.5, int dim = 2) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Sample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    const double sign = label == 0 ? 1.0 : -1.0;
    Eigen::VectorXd x(dim);
    for (int j = 0; j < dim; ++j) x[j] = sign * center + noise(rng);
    out.push_back({std::move(x), label});
  }
  return out;
}

/// Writes samples as a CSV with header f0..f{d-1},label.
inline void write_csv(const std::filesystem::path& path, const std::vector<Sample>& samples) {
  std::ofstream out(path);
  const auto dim = samples.front().features.size();
  for (Eigen::Index j = 0; j < dim; ++j) out << "f" << j << ",";
  out << "label\n";
  out.precision(17);
  for (const Sample& s : samples) {
    for (Eigen::Index j = 0; j < dim; ++j) out << s.features[j] << ",";
    out << s.label.value() << "\n";
  }
}

inline std::vector<std::string> feature_names(int dim) {
  std::vector<std::string> names;
  for (int j = 0; j < dim; ++j) names.push_back("f" + std::to_string(j));
  return names;
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("tril3_test_" + tag);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace tril3::testing

#endif  // TRIL3_TESTS_SUPPORT_HPP
