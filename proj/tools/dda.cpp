// Config-driven experiment runner for streaming drift adaptation:
//   generate        emit a synthetic stream CSV (+ oracle weights)
//   run             execute every (method, seed) cell of a config
//   sweep           re-run a config across values of one scalar field
//   inspect-weights dump per-task resampling probabilities
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dda/error.hpp"
#include "dda/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool need_config = true) {
  auto* config = cmd->add_option("--config", args.config_path, "Experiment config (JSON)");
  if (need_config) config->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "Output directory (overrides config output_dir)");
  cmd->add_option_function<std::uint64_t>(
      "--seed-override",
      [&args](const std::uint64_t& v) { args.seed_override = v; },
      "Replace the config's seed list with a single seed");
  cmd->add_option("--threads", args.threads, "Parallel (method, seed) cells")
      ->check(CLI::PositiveNumber);
}

dda::RunOptions to_options(const CommonArgs& args) {
  dda::RunOptions opts;
  opts.out_dir_override = args.out_dir;
  opts.seed_override = args.seed_override;
  opts.threads = args.threads;
  return opts;
}

int report_cells(const dda::RunManifest& manifest) {
  int failures = 0;
  for (const auto& cell : manifest.cells) {
    if (cell.ok) {
      std::cout << "ok   " << cell.method << " seed=" << cell.seed;
      for (const auto& [name, value] : cell.report.values)
        std::cout << ' ' << name << '=' << value;
      std::cout << '\n';
    } else {
      ++failures;
      std::cout << "FAIL " << cell.method << " seed=" << cell.seed << ": " << cell.error
                << '\n';
    }
  }
  return failures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streaming drift adaptation experiments"};
  app.require_subcommand(1);

  CommonArgs gen_args, run_args, sweep_args, inspect_args;
  std::string sweep_param;
  std::vector<double> sweep_values;
  std::string inspect_model;

  auto* gen = app.add_subcommand("generate", "Emit a synthetic stream CSV");
  add_common(gen, gen_args);

  auto* run = app.add_subcommand("run", "Execute an experiment config");
  add_common(run, run_args);

  auto* sweep = app.add_subcommand("sweep", "Run a config across values of one scalar field");
  add_common(sweep, sweep_args);
  sweep->add_option("--param", sweep_param, "Dotted config path, e.g. tasks.interval")
      ->required();
  sweep->add_option("--values", sweep_values, "Values to sweep")->required()->delimiter(',');

  auto* inspect =
      app.add_subcommand("inspect-weights", "Dump per-task resampling probabilities");
  add_common(inspect, inspect_args);
  inspect->add_option("--model", inspect_model,
                      "Trained model JSON (trains on the config's train tasks when omitted)")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto cfg = dda::load_experiment_config(gen_args.config_path);
      const std::filesystem::path out =
          gen_args.out_dir.empty() ? cfg.output_dir : gen_args.out_dir;
      dda::generate_scenario_files(cfg.scenario, out, gen_args.seed_override);
      std::cout << "wrote " << (out / "stream.csv").generic_string() << '\n';
      return 0;
    }

    if (*run) {
      const auto cfg = dda::load_experiment_config(run_args.config_path);
      const auto manifest = dda::run_experiment(cfg, to_options(run_args));
      const int failures = report_cells(manifest);
      std::cout << "wall_seconds=" << manifest.wall_seconds << '\n';
      return failures == 0 ? 0 : 1;
    }

    if (*sweep) {
      const auto cfg = dda::load_experiment_config(sweep_args.config_path);
      const auto result =
          dda::sweep_experiment(cfg, sweep_param, sweep_values, to_options(sweep_args));
      int failures = 0;
      for (std::size_t i = 0; i < result.manifests.size(); ++i) {
        std::cout << "== " << sweep_param << " = " << result.values[i] << " ==\n";
        failures += report_cells(result.manifests[i]);
      }
      return failures == 0 ? 0 : 1;
    }

    // inspect-weights: load (or train) the resampler, then dump q per test task.
    const auto cfg = dda::load_experiment_config(inspect_args.config_path);
    const std::filesystem::path out =
        inspect_args.out_dir.empty() ? cfg.output_dir : inspect_args.out_dir;
    const std::uint64_t seed = inspect_args.seed_override.value_or(cfg.seeds.front());

    dda::TrainedResampler trained;
    const auto split = dda::build_task_split(cfg, seed);
    if (!inspect_model.empty()) {
      trained = dda::load_trained(inspect_model);
    } else {
      const auto* method = [&]() -> const dda::MethodConfig* {
        for (const auto& m : cfg.methods)
          if (m.name == "ddgda_closed" || m.name == "ddgda_gho") return &m;
        return nullptr;
      }();
      if (!method)
        throw dda::Error("inspect-weights: config lists no ddgda_* method and no --model given");
      dda::TrainConfig train_cfg = method->train;
      train_cfg.seed += seed;
      trained = dda::train(split.train_tasks, train_cfg);
    }

    std::filesystem::create_directories(out);
    for (const auto& task : split.test_tasks) {
      const auto feats = dda::extract_features(task, trained.period_length,
                                               trained.model.lags(),
                                               trained.config_echo.feature_ridge,
                                               trained.config_echo.add_bias);
      const auto q = dda::compute_weights(trained.model, feats);
      const auto path = out / ("weights_task_" + std::to_string(task.task_time()) + ".csv");
      dda::write_weight_dump_csv(task, q, path);
    }
    std::cout << "wrote " << split.test_tasks.size() << " weight dumps under "
              << out.generic_string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
