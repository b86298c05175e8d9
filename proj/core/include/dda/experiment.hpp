#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dda/baselines.hpp"
#include "dda/drift_gen.hpp"
#include "dda/metrics.hpp"
#include "dda/stream.hpp"
#include "dda/trainer.hpp"

namespace dda {

struct ScenarioConfig {
  enum class Kind { gradual, abrupt, csv };
  Kind kind = Kind::gradual;
  std::string name;  // report identifier; defaults to the kind
  GradualDriftSpec gradual;
  AbruptDriftSpec abrupt;
  std::string csv_path;
  Tick csv_period_length = 1;
};

struct TaskParams {
  Tick memory_k = 1;
  Tick horizon_tau = 1;
  Tick interval = 1;
  Tick split_time = 0;
  // When set, each task's horizon equals the rolling interval, so evaluation
  // covers every tick between consecutive retrains (interval sweeps measure
  // staleness rather than just task spacing).
  bool horizon_follows_interval = false;
  bool allow_partial_memory = false;
};

// One experiment method cell. Baselines read ridge/bias/mlp settings from
// `train` as their downstream configuration; ddgda_* use all of it.
struct MethodConfig {
  std::string name;          // rr | gf_lin | gf_exp | ddgda_closed | ddgda_gho
  TrainConfig train;
  std::vector<double> grid;  // gf decay grid; empty = built-in default
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  TaskParams tasks;
  std::vector<MethodConfig> methods;
  Downstream downstream = Downstream::linear;
  std::vector<std::string> metrics;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";
  bool dump_weights = false;
  std::string raw_json;  // resolved config echo
};

// Parse + validate a declarative JSON experiment config. Error messages name
// the offending field.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Metric names `run_experiment` accepts.
const std::vector<std::string>& known_metrics();

// Build the stream and task split exactly as `run_experiment` does for one
// run seed (synthetic scenarios mix the seed into the generator).
TaskSplit build_task_split(const ExperimentConfig& config, std::uint64_t run_seed);

struct CellResult {
  std::string method;
  std::uint64_t seed = 0;
  bool ok = false;
  MetricReport report;                    // valid when ok
  std::string error;                      // diagnostic when !ok
  std::vector<double> loss_history;       // ddgda training curve
  std::map<std::string, double> tuning;   // e.g. selected gf decay rate
  std::vector<std::string> artifacts;     // paths relative to the output dir
};

struct RunManifest {
  std::string scenario;
  std::vector<std::string> metric_names;
  std::vector<CellResult> cells;  // one per (method, seed), config order
  std::string config_echo;
  double wall_seconds = 0.0;

  bool all_ok() const;
  // Deterministic flat metric table: byte-identical across reruns of the
  // same config (wall time is deliberately excluded).
  std::string metrics_csv() const;
  std::string to_json() const;
};

struct RunOptions {
  std::string out_dir_override;                // empty = config output_dir
  std::optional<std::uint64_t> seed_override;  // replaces the seeds list
  int threads = 1;                             // parallel (method, seed) cells
  bool write_outputs = true;                   // manifest.json + metrics.csv + artifacts
};

// Execute every (method, seed) cell: build the stream and task split, fit the
// method on the train tasks, evaluate on the test tasks, aggregate metrics.
// A failing cell records its diagnostic; the others proceed.
RunManifest run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

struct SweepResult {
  std::string param_path;
  std::vector<double> values;
  std::vector<RunManifest> manifests;  // one per value

  // Consolidated table: param,value,scenario,method,seed,<metrics...>.
  std::string consolidated_csv() const;
};

// One run per value with `param_path` (dotted path into the config JSON,
// e.g. "tasks.interval" or "methods.0.gho_steps") set to that value.
// The path is validated before any run starts.
SweepResult sweep_experiment(const ExperimentConfig& config, const std::string& param_path,
                             std::span<const double> values, const RunOptions& options = {});

// `generate` verb: write stream.csv (+ oracle_weights.csv for synthetic
// scenarios) into out_dir.
void generate_scenario_files(const ScenarioConfig& scenario,
                             const std::filesystem::path& out_dir,
                             std::optional<std::uint64_t> seed_override);

}  // namespace dda
