#include "tril3/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace tril3 {
namespace {

// Splits one RFC-4180 line into fields, honoring double-quoted cells.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

double parse_double(const std::string& cell, std::size_t row, const std::string& column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << "row " << row << ", column '" << column << "': cannot parse '" << cell
        << "' as a number";
    throw DataError(msg.str());
  }
  return value;
}

long parse_label(const std::string& cell, std::size_t row, const std::string& column) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || value < 0) {
    std::ostringstream msg;
    msg << "row " << row << ", column '" << column << "': cannot parse '" << cell
        << "' as a non-negative integer label";
    throw DataError(msg.str());
  }
  return value;
}

}  // namespace

Dataset load_csv(const DatasetSpec& spec) {
  if (spec.train_fraction <= 0.0 || spec.train_fraction > 1.0)
    throw DataError("train_fraction must be in (0, 1]");
  std::ifstream in(spec.path);
  if (!in) throw DataError("cannot open file: " + spec.path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + spec.path);
  const auto header = split_csv_line(line);

  auto column_index = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("unknown column name: '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };

  std::vector<std::size_t> feature_idx;
  feature_idx.reserve(spec.feature_columns.size());
  for (const auto& name : spec.feature_columns) {
    if (name == spec.label_column)
      throw DataError("feature column '" + name + "' collides with the label column");
    feature_idx.push_back(column_index(name));
  }
  if (feature_idx.empty()) throw DataError("no feature columns given");
  const std::size_t label_idx = column_index(spec.label_column);

  std::vector<Sample> rows;
  std::vector<long> raw_row_labels;
  std::size_t row_number = 1;  // header is row 1
  while (std::getline(in, line)) {
    ++row_number;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      std::ostringstream msg;
      msg << "row " << row_number << ": expected " << header.size() << " fields, got "
          << fields.size();
      throw DataError(msg.str());
    }
    Sample s;
    s.features.resize(static_cast<Eigen::Index>(feature_idx.size()));
    for (std::size_t f = 0; f < feature_idx.size(); ++f)
      s.features[static_cast<Eigen::Index>(f)] =
          parse_double(fields[feature_idx[f]], row_number, spec.feature_columns[f]);
    raw_row_labels.push_back(parse_label(fields[label_idx], row_number, spec.label_column));
    rows.push_back(std::move(s));
  }
  if (rows.empty()) throw DataError("no data rows in: " + spec.path);

  // Dense label ids in sorted raw-label order.
  std::vector<long> distinct(raw_row_labels);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::map<long, int> to_dense;
  for (std::size_t i = 0; i < distinct.size(); ++i)
    to_dense[distinct[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < rows.size(); ++i)
    rows[i].label = to_dense[raw_row_labels[i]];

  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(spec.split_seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n = rows.size();
  auto n_train = static_cast<std::size_t>(
      std::llround(spec.train_fraction * static_cast<double>(n)));
  n_train = std::min(n_train, n);

  Dataset out;
  out.num_classes = static_cast<int>(distinct.size());
  out.raw_labels = std::move(distinct);
  out.train.reserve(n_train);
  out.test.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_train)
      out.train.push_back(std::move(rows[order[i]]));
    else
      out.test.push_back(std::move(rows[order[i]]));
  }
  return out;
}

}  // namespace tril3
