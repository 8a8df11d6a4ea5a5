#ifndef TRIL3_DATASET_HPP
#define TRIL3_DATASET_HPP

#include <string>
#include <vector>

#include "tril3/sample.hpp"

namespace tril3 {

/// Where to find a dataset and how to read it.
struct DatasetSpec {
  std::string path;
  std::vector<std::string> feature_columns;
  std::string label_column;
  double train_fraction = 0.9;
  std::uint64_t split_seed = 0;
};

struct Dataset {
  std::vector<Sample> train;
  std::vector<Sample> test;
  int num_classes = 0;
  /// Sorted distinct raw labels; raw_labels[i] maps to dense class i.
  std::vector<long> raw_labels;
};

/// Thrown when a file cannot be read or a cell fails to parse. The message
/// names the offending row and column.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reads an RFC-4180-style CSV (header row, '.' decimal separator) and
/// performs a seeded shuffle-then-cut train/test split. Labels are remapped
/// to dense ids 0..K-1 in sorted raw-label order.
Dataset load_csv(const DatasetSpec& spec);

}  // namespace tril3

#endif  // TRIL3_DATASET_HPP
