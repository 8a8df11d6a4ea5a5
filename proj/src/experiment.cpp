#include "tril3/experiment.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace tril3 {
namespace {

using nlohmann::json;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

template <typename T>
T require(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("missing config field: " + key);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + key + "' has the wrong type");
  }
}

template <typename T>
T optional_field(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + key + "' has the wrong type");
  }
}

std::vector<int> to_int_labels(const std::vector<Prediction>& preds) {
  std::vector<int> out;
  out.reserve(preds.size());
  for (const auto& p : preds) out.push_back(p.label);
  return out;
}

std::vector<int> truth_labels(const Batch& batch) {
  std::vector<int> out;
  out.reserve(batch.size());
  for (const auto& s : batch.samples) out.push_back(s.label.value());
  return out;
}

std::vector<long> counts_vector(const PrototypeStore& store, int num_classes) {
  std::vector<long> counts(static_cast<std::size_t>(num_classes), 0);
  for (const auto& [label, n] : store.class_counts())
    if (label >= 0 && label < num_classes) counts[static_cast<std::size_t>(label)] = n;
  return counts;
}

}  // namespace

Strategy strategy_from_string(const std::string& name) {
  if (name == "tril3") return Strategy::tril3;
  if (name == "naive") return Strategy::naive;
  if (name == "replay_mlp") return Strategy::replay_mlp;
  if (name == "offline_dndf") return Strategy::offline_dndf;
  throw ConfigError("unknown strategy '" + name +
                    "' (expected tril3 | naive | replay_mlp | offline_dndf)");
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::tril3: return "tril3";
    case Strategy::naive: return "naive";
    case Strategy::replay_mlp: return "replay_mlp";
    case Strategy::offline_dndf: return "offline_dndf";
  }
  return "?";
}

ExperimentConfig ExperimentConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  const json jd = require<json>(j, "dataset");
  cfg.dataset.path = require<std::string>(jd, "path");
  cfg.dataset.feature_columns = require<std::vector<std::string>>(jd, "feature_columns");
  cfg.dataset.label_column = require<std::string>(jd, "label_column");
  cfg.dataset.train_fraction = optional_field(jd, "train_fraction", 0.9);
  cfg.dataset.split_seed = optional_field<std::uint64_t>(jd, "split_seed", 0);

  const json js = require<json>(j, "schedule");
  cfg.schedule.batch_size = optional_field(js, "batch_size", 32);
  cfg.schedule.forgetting_class = require<int>(js, "forgetting_class");
  cfg.schedule.forgetting_start = require<long>(js, "forgetting_start");
  cfg.schedule.forgetting_end = require<long>(js, "forgetting_end");
  cfg.schedule.shuffle_seed = optional_field<std::uint64_t>(js, "shuffle_seed", 0);

  cfg.strategy = strategy_from_string(require<std::string>(j, "strategy"));
  cfg.real_data_ratio = optional_field(j, "real_data_ratio", 0.5);
  cfg.jitter_sigma = optional_field(j, "jitter_sigma", 0.0);
  cfg.retrain_always = optional_field(j, "retrain_always", false);

  if (j.contains("ilvq")) {
    const json ji = j.at("ilvq");
    cfg.ilvq.max_per_class = optional_field<long>(ji, "max_per_class", 100);
    cfg.ilvq.age_limit = optional_field<long>(ji, "age_limit", 50);
    cfg.ilvq.learn_rate_winner = optional_field(ji, "learn_rate_winner", 1.0);
    cfg.ilvq.learn_rate_runner = optional_field(ji, "learn_rate_runner", 0.1);
  }
  if (j.contains("forest")) {
    const json jf = j.at("forest");
    cfg.forest.num_trees = optional_field(jf, "num_trees", 10);
    cfg.forest.depth = optional_field(jf, "depth", 5);
    cfg.forest.subset_fraction = optional_field(jf, "subset_fraction", 0.5);
    cfg.forest.learning_rate = optional_field(jf, "learning_rate", 0.01);
  }
  if (j.contains("mlp")) {
    const json jm = j.at("mlp");
    cfg.mlp.hidden = optional_field(jm, "hidden", 128);
    cfg.mlp.learning_rate = optional_field(jm, "learning_rate", 0.02);
    cfg.mlp.momentum = optional_field(jm, "momentum", 0.95);
  }
  cfg.buffer_capacity = optional_field<long>(j, "buffer_capacity", 200);
  cfg.offline_epochs = optional_field(j, "offline_epochs", 10);
  cfg.offline_mini_batch = optional_field(j, "offline_mini_batch", 32);
  cfg.eval_stride = optional_field(j, "eval_stride", 1);
  cfg.seed = optional_field<std::uint64_t>(j, "seed", 0);
  cfg.output_dir = optional_field<std::string>(j, "output_dir", "");

  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  if (dataset.path.empty()) throw ConfigError("dataset.path must not be empty");
  if (dataset.feature_columns.empty())
    throw ConfigError("dataset.feature_columns must not be empty");
  if (dataset.train_fraction <= 0.0 || dataset.train_fraction > 1.0)
    throw ConfigError("dataset.train_fraction must be in (0, 1]");
  if (schedule.batch_size <= 0) throw ConfigError("schedule.batch_size must be positive");
  if (schedule.forgetting_start > schedule.forgetting_end)
    throw ConfigError("schedule.forgetting_start must not exceed forgetting_end");
  if (real_data_ratio <= 0.0 || real_data_ratio > 1.0)
    throw ConfigError("real_data_ratio must be in (0, 1]");
  if (jitter_sigma < 0.0) throw ConfigError("jitter_sigma must be non-negative");
  if (buffer_capacity <= 0) throw ConfigError("buffer_capacity must be positive");
  if (eval_stride <= 0) throw ConfigError("eval_stride must be positive");
  if (offline_epochs < 0) throw ConfigError("offline_epochs must be non-negative");
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const Dataset data = load_csv(config.dataset);
  const int k = data.num_classes;

  Batch test_batch;
  test_batch.samples = data.test;

  ExperimentResult result;
  result.num_classes = k;
  const std::vector<int> truths = truth_labels(test_batch);

  if (config.strategy == Strategy::offline_dndf) {
    const auto t0 = std::chrono::steady_clock::now();
    const OfflineForest model =
        offline_fit(config.forest, data.train, k, config.offline_epochs,
                    config.offline_mini_batch, mix_seed(config.seed, 1));
    const auto preds = model.forest.predict(model.scaler.transform(test_batch));
    const auto t1 = std::chrono::steady_clock::now();

    BatchRecord rec;
    rec.batch_idx = 0;
    rec.f1 = f1_per_class(to_int_labels(preds), truths, k);
    rec.retrained = true;
    rec.millis = std::chrono::duration<double, std::milli>(t1 - t0).count();
    result.timeline.records.push_back(rec);
    result.summary = {rec.f1, rec.f1};  // a single fit, one value for both phases
    return result;
  }

  const auto batches = schedule_batches(data.train, config.schedule);
  const int num_features = static_cast<int>(batches.front().feature_dim());

  auto evaluate_at = [&](long idx) {
    return idx % config.eval_stride == 0 ||
           idx + 1 == static_cast<long>(batches.size());
  };

  if (config.strategy == Strategy::tril3 || config.strategy == Strategy::naive) {
    Tril3Config pipe_cfg;
    pipe_cfg.real_data_ratio =
        config.strategy == Strategy::naive ? 1.0 : config.real_data_ratio;
    pipe_cfg.jitter_sigma = config.jitter_sigma;
    pipe_cfg.retrain_always = config.retrain_always;
    pipe_cfg.seed = config.seed;
    Tril3Pipeline pipeline(pipe_cfg, config.ilvq,
                           ForestModel::init(num_features, k, config.forest,
                                             mix_seed(config.seed, 1)));

    for (long idx = 0; idx < static_cast<long>(batches.size()); ++idx) {
      const auto t0 = std::chrono::steady_clock::now();
      const BatchOutcome outcome = pipeline.process_labeled_batch(batches[idx]);
      const auto t1 = std::chrono::steady_clock::now();
      if (!evaluate_at(idx)) continue;
      BatchRecord rec;
      rec.batch_idx = idx;
      rec.f1 = f1_per_class(to_int_labels(pipeline.predict_batch(test_batch)), truths, k);
      rec.prototype_counts = counts_vector(pipeline.store(), k);
      rec.retrained = outcome.retrained;
      rec.millis = std::chrono::duration<double, std::milli>(t1 - t0).count();
      result.timeline.records.push_back(std::move(rec));
    }
  } else {  // replay_mlp
    RunningMoments scaler;
    ReplayBuffer buffer(config.buffer_capacity, mix_seed(config.seed, 3));
    MlpModel mlp = MlpModel::init(num_features, k, config.mlp, mix_seed(config.seed, 2));

    for (long idx = 0; idx < static_cast<long>(batches.size()); ++idx) {
      const auto t0 = std::chrono::steady_clock::now();
      scaler.update(batches[idx]);
      const Batch standardized = scaler.transform(batches[idx]);
      replay_train_step(mlp, buffer, standardized,
                        mix_seed(config.seed, 1000 + static_cast<std::uint64_t>(idx)));
      buffer.update(standardized);
      const auto t1 = std::chrono::steady_clock::now();
      if (!evaluate_at(idx)) continue;
      BatchRecord rec;
      rec.batch_idx = idx;
      rec.f1 = f1_per_class(to_int_labels(mlp.predict(scaler.transform(test_batch))),
                            truths, k);
      rec.retrained = true;
      rec.millis = std::chrono::duration<double, std::milli>(t1 - t0).count();
      result.timeline.records.push_back(std::move(rec));
    }
  }

  result.summary = summarize_phases(result.timeline, config.schedule.forgetting_start,
                                    config.schedule.forgetting_end);
  return result;
}

void emit_outputs(const ExperimentResult& result, const ExperimentConfig& config,
                  const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto metrics_path = dir / "metrics.jsonl";
  const auto summary_path = dir / "summary.json";

  std::ofstream metrics(metrics_path);
  if (!metrics) throw std::runtime_error("unwritable path: " + metrics_path.string());
  for (const BatchRecord& r : result.timeline.records) {
    json line;
    line["batch_idx"] = r.batch_idx;
    line["f1"] = std::vector<double>(r.f1.data(), r.f1.data() + r.f1.size());
    line["prototype_counts"] = r.prototype_counts;
    line["retrained"] = r.retrained;
    line["millis"] = r.millis;
    metrics << line.dump() << "\n";
  }

  json summary;
  summary["strategy"] = to_string(config.strategy);
  summary["num_classes"] = result.num_classes;
  summary["forgetting_start"] = config.schedule.forgetting_start;
  summary["forgetting_end"] = config.schedule.forgetting_end;
  summary["aggregation"] = "mean-over-phase";
  summary["before_mean"] = std::vector<double>(
      result.summary.before_mean.data(),
      result.summary.before_mean.data() + result.summary.before_mean.size());
  summary["during_mean"] = std::vector<double>(
      result.summary.during_mean.data(),
      result.summary.during_mean.data() + result.summary.during_mean.size());
  std::ofstream out(summary_path);
  if (!out) throw std::runtime_error("unwritable path: " + summary_path.string());
  out << summary.dump(2) << "\n";
}

ExperimentResult read_outputs(const std::filesystem::path& dir) {
  ExperimentResult result;
  std::ifstream metrics(dir / "metrics.jsonl");
  if (!metrics) throw DataError("cannot open " + (dir / "metrics.jsonl").string());
  std::string line;
  while (std::getline(metrics, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    BatchRecord r;
    r.batch_idx = j.at("batch_idx").get<long>();
    const auto f1 = j.at("f1").get<std::vector<double>>();
    r.f1 = Eigen::Map<const Eigen::VectorXd>(f1.data(), static_cast<Eigen::Index>(f1.size()));
    r.prototype_counts = j.at("prototype_counts").get<std::vector<long>>();
    r.retrained = j.at("retrained").get<bool>();
    r.millis = j.at("millis").get<double>();
    result.timeline.records.push_back(std::move(r));
  }

  std::ifstream sin(dir / "summary.json");
  if (!sin) throw DataError("cannot open " + (dir / "summary.json").string());
  const json s = json::parse(sin);
  result.num_classes = s.at("num_classes").get<int>();
  const auto before = s.at("before_mean").get<std::vector<double>>();
  const auto during = s.at("during_mean").get<std::vector<double>>();
  result.summary.before_mean =
      Eigen::Map<const Eigen::VectorXd>(before.data(), static_cast<Eigen::Index>(before.size()));
  result.summary.during_mean =
      Eigen::Map<const Eigen::VectorXd>(during.data(), static_cast<Eigen::Index>(during.size()));
  return result;
}

void dump_prototypes(const ExperimentConfig& config, std::ostream& out) {
  const Dataset data = load_csv(config.dataset);
  const auto batches = schedule_batches(data.train, config.schedule);
  const int num_features = static_cast<int>(batches.front().feature_dim());

  Tril3Config pipe_cfg;
  pipe_cfg.real_data_ratio = config.real_data_ratio;
  pipe_cfg.jitter_sigma = config.jitter_sigma;
  pipe_cfg.retrain_always = config.retrain_always;
  pipe_cfg.seed = config.seed;
  Tril3Pipeline pipeline(pipe_cfg, config.ilvq,
                         ForestModel::init(num_features, data.num_classes, config.forest,
                                           mix_seed(config.seed, 1)));
  for (const Batch& b : batches) pipeline.process_labeled_batch(b);
  pipeline.store().dump_csv(out);
}

}  // namespace tril3
