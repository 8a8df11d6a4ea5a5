#ifndef TRIL3_EXPERIMENT_HPP
#define TRIL3_EXPERIMENT_HPP

#include <filesystem>
#include <iosfwd>
#include <string>

#include "tril3/dataset.hpp"
#include "tril3/ilvq.hpp"
#include "tril3/metrics.hpp"
#include "tril3/ndf.hpp"
#include "tril3/pipeline.hpp"
#include "tril3/replay.hpp"
#include "tril3/schedule.hpp"

namespace tril3 {

enum class Strategy { tril3, naive, replay_mlp, offline_dndf };

Strategy strategy_from_string(const std::string& name);
std::string to_string(Strategy s);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  StreamSchedule schedule;
  Strategy strategy = Strategy::tril3;

  double real_data_ratio = 0.5;
  double jitter_sigma = 0.0;
  bool retrain_always = false;

  IlvqParams ilvq;
  ForestHyperparams forest;
  MlpHyperparams mlp;
  long buffer_capacity = 200;
  int offline_epochs = 10;
  int offline_mini_batch = 32;

  int eval_stride = 1;  // evaluate the test set every Nth batch
  std::uint64_t seed = 0;
  std::string output_dir;

  /// Parses the flat JSON config document; throws ConfigError with a
  /// field-level message on any invalid or missing value.
  static ExperimentConfig from_json_file(const std::filesystem::path& path);
  static ExperimentConfig from_json_text(const std::string& text);
  void validate() const;
};

struct ExperimentResult {
  MetricsTimeline timeline;
  PhaseSummary summary;
  int num_classes = 0;
};

/// Drives the configured strategy over the scheduled stream, evaluating
/// per-class F1 on the held-out test set after every eval_stride-th training
/// batch. offline_dndf fits once and evaluates once.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes metrics.jsonl (one record per batch) and summary.json under dir.
void emit_outputs(const ExperimentResult& result, const ExperimentConfig& config,
                  const std::filesystem::path& dir);

/// Re-reads an emitted metrics.jsonl + summary.json pair.
ExperimentResult read_outputs(const std::filesystem::path& dir);

/// Trains the tril3 prototype store over the configured stream and writes
/// the prototype dump CSV to `out`.
void dump_prototypes(const ExperimentConfig& config, std::ostream& out);

}  // namespace tril3

#endif  // TRIL3_EXPERIMENT_HPP
