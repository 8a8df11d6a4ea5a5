#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tril3/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitDataError = 2;

void print_summary(const tril3::ExperimentResult& result, const std::string& name) {
  std::cout << "== " << name << " ==\n";
  std::cout << std::fixed << std::setprecision(4);
  for (int c = 0; c < result.num_classes; ++c) {
    std::cout << "  class " << c << ": F1 before " << result.summary.before_mean[c]
              << "  during " << result.summary.during_mean[c] << "\n";
  }
}

int cmd_run(const std::string& config_path, const std::string& output_override) {
  const auto config = tril3::ExperimentConfig::from_json_file(config_path);
  const auto result = tril3::run_experiment(config);

  std::string out_dir = output_override.empty() ? config.output_dir : output_override;
  if (!out_dir.empty()) {
    tril3::emit_outputs(result, config, out_dir);
    std::cout << "wrote " << out_dir << "/metrics.jsonl and summary.json\n";
  }
  print_summary(result, tril3::to_string(config.strategy));
  return kExitOk;
}

int cmd_compare(const std::vector<std::string>& dirs) {
  std::vector<tril3::ExperimentResult> results;
  for (const auto& d : dirs) results.push_back(tril3::read_outputs(d));

  std::cout << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < results.size(); ++i)
    print_summary(results[i], dirs[i]);

  if (results.size() > 1) {
    std::cout << "== during-phase F1 deltas vs " << dirs[0] << " ==\n";
    for (std::size_t i = 1; i < results.size(); ++i) {
      std::cout << "  " << dirs[i] << ":";
      const auto k = std::min(results[0].summary.during_mean.size(),
                              results[i].summary.during_mean.size());
      for (Eigen::Index c = 0; c < k; ++c)
        std::cout << "  class " << c << " "
                  << results[i].summary.during_mean[c] - results[0].summary.during_mean[c];
      std::cout << "\n";
    }
  }
  return kExitOk;
}

int cmd_dump_prototypes(const std::string& config_path, const std::string& out_path) {
  const auto config = tril3::ExperimentConfig::from_json_file(config_path);
  if (out_path.empty() || out_path == "-") {
    tril3::dump_prototypes(config, std::cout);
  } else {
    std::ofstream out(out_path);
    if (!out) throw tril3::DataError("unwritable path: " + out_path);
    tril3::dump_prototypes(config, out);
    std::cout << "wrote " << out_path << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TRIL3 continual-learning experiment harness"};
  app.require_subcommand(1);

  std::string run_config, run_output;
  auto* run = app.add_subcommand("run", "Run one experiment from a JSON config");
  run->add_option("--config", run_config, "Path to the experiment config")->required();
  run->add_option("--output", run_output, "Override the config's output_dir");

  std::vector<std::string> compare_dirs;
  auto* compare = app.add_subcommand("compare", "Compare emitted experiment outputs");
  compare->add_option("dirs", compare_dirs, "Output directories to compare")
      ->required()
      ->expected(-1);

  std::string dump_config, dump_out;
  auto* dump = app.add_subcommand("dump-prototypes",
                                  "Train the prototype store and dump it as CSV");
  dump->add_option("--config", dump_config, "Path to the experiment config")->required();
  dump->add_option("--output", dump_out, "CSV destination (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_config, run_output);
    if (compare->parsed()) return cmd_compare(compare_dirs);
    if (dump->parsed()) return cmd_dump_prototypes(dump_config, dump_out);
  } catch (const tril3::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const tril3::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitOk;
}
