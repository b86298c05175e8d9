#include "dda/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dda/csv.hpp"
#include "dda/error.hpp"

namespace dda {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw Error("config: " + where + ": " + what);
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("config: invalid json: ") + e.what());
  }
}

template <typename T>
T get_field(const json& j, const std::string& where, const std::string& key) {
  if (!j.contains(key)) config_error(where, "missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(where, "field '" + key + "' has the wrong type");
  }
}

template <typename T>
T get_field_or(const json& j, const std::string& where, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(where, "field '" + key + "' has the wrong type");
  }
}

ScenarioConfig parse_scenario(const json& j) {
  ScenarioConfig sc;
  const std::string type = get_field<std::string>(j, "scenario", "type");
  if (type == "gradual") {
    sc.kind = ScenarioConfig::Kind::gradual;
    sc.gradual.feature_dim = get_field_or(j, "scenario", "feature_dim", sc.gradual.feature_dim);
    sc.gradual.total_length =
        get_field_or<Tick>(j, "scenario", "total_length", sc.gradual.total_length);
    sc.gradual.rotation_rate =
        get_field_or(j, "scenario", "rotation_rate", sc.gradual.rotation_rate);
    sc.gradual.noise_std = get_field_or(j, "scenario", "noise_std", sc.gradual.noise_std);
    sc.gradual.seed = get_field_or<std::uint64_t>(j, "scenario", "seed", sc.gradual.seed);
    sc.gradual.period_length =
        get_field_or<Tick>(j, "scenario", "period_length", sc.gradual.period_length);
  } else if (type == "abrupt") {
    sc.kind = ScenarioConfig::Kind::abrupt;
    sc.abrupt.feature_dim = get_field_or(j, "scenario", "feature_dim", sc.abrupt.feature_dim);
    sc.abrupt.segment_lengths = get_field<std::vector<Tick>>(j, "scenario", "segment_lengths");
    sc.abrupt.noise_std = get_field_or(j, "scenario", "noise_std", sc.abrupt.noise_std);
    sc.abrupt.seed = get_field_or<std::uint64_t>(j, "scenario", "seed", sc.abrupt.seed);
    sc.abrupt.period_length =
        get_field_or<Tick>(j, "scenario", "period_length", sc.abrupt.period_length);
  } else if (type == "csv") {
    sc.kind = ScenarioConfig::Kind::csv;
    sc.csv_path = get_field<std::string>(j, "scenario", "path");
    sc.csv_period_length = get_field<Tick>(j, "scenario", "period_length");
  } else {
    config_error("scenario", "unknown type '" + type + "' (gradual | abrupt | csv)");
  }
  sc.name = get_field_or<std::string>(j, "scenario", "name", type);
  return sc;
}

TrainConfig parse_train_config(const json& j, const std::string& where, OptimizerPath path) {
  TrainConfig cfg;
  cfg.optimizer_path = path;
  cfg.learning_rate = get_field_or(j, where, "learning_rate", cfg.learning_rate);
  cfg.epochs = get_field_or(j, where, "epochs", cfg.epochs);
  cfg.batch = get_field_or(j, where, "batch", cfg.batch);
  cfg.sigma = get_field_or(j, where, "sigma", cfg.sigma);
  cfg.ridge_lambda = get_field_or(j, where, "ridge_lambda", cfg.ridge_lambda);
  cfg.seed = get_field_or<std::uint64_t>(j, where, "seed", cfg.seed);
  cfg.gho_steps = get_field_or(j, where, "gho_steps", cfg.gho_steps);
  cfg.gho_inner_lr = get_field_or(j, where, "gho_inner_lr", cfg.gho_inner_lr);
  cfg.grad_clip = get_field_or(j, where, "grad_clip", cfg.grad_clip);
  cfg.feature_ridge = get_field_or(j, where, "feature_ridge", cfg.feature_ridge);
  cfg.outer_optimizer = outer_optimizer_from_string(
      get_field_or<std::string>(j, where, "outer_optimizer", to_string(cfg.outer_optimizer)));
  cfg.lags = get_field_or(j, where, "lags", cfg.lags);
  cfg.temperature = get_field_or(j, where, "temperature", cfg.temperature);
  cfg.add_bias = get_field_or(j, where, "add_bias", cfg.add_bias);
  cfg.mlp_hidden = get_field_or(j, where, "mlp_hidden", cfg.mlp_hidden);
  cfg.mlp_steps = get_field_or(j, where, "mlp_steps", cfg.mlp_steps);
  cfg.mlp_lr = get_field_or(j, where, "mlp_lr", cfg.mlp_lr);
  try {
    validate_config(cfg);
  } catch (const Error& e) {
    config_error(where, e.what());
  }
  return cfg;
}

bool is_ddgda(const std::string& name) {
  return name == "ddgda_closed" || name == "ddgda_gho";
}

bool is_known_method(const std::string& name) {
  return is_ddgda(name) || name == "rr" || name == "gf_lin" || name == "gf_exp";
}

}  // namespace

const std::vector<std::string>& known_metrics() {
  static const std::vector<std::string> names = {"mse",   "mae",  "rmse", "nmae",
                                                 "nrmse", "skill", "ic",  "icir"};
  return names;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  const json j = parse_json(json_text);
  ExperimentConfig cfg;
  cfg.raw_json = j.dump(2);

  if (!j.contains("scenario")) config_error("(root)", "missing field 'scenario'");
  cfg.scenario = parse_scenario(j.at("scenario"));

  if (!j.contains("tasks")) config_error("(root)", "missing field 'tasks'");
  const json& jt = j.at("tasks");
  cfg.tasks.memory_k = get_field<Tick>(jt, "tasks", "memory_k");
  cfg.tasks.horizon_tau = get_field<Tick>(jt, "tasks", "horizon_tau");
  cfg.tasks.interval = get_field<Tick>(jt, "tasks", "interval");
  cfg.tasks.split_time = get_field<Tick>(jt, "tasks", "split_time");
  cfg.tasks.horizon_follows_interval =
      get_field_or(jt, "tasks", "horizon_follows_interval", false);
  cfg.tasks.allow_partial_memory = get_field_or(jt, "tasks", "allow_partial_memory", false);
  if (cfg.tasks.memory_k < 1 || cfg.tasks.horizon_tau < 1 || cfg.tasks.interval < 1)
    config_error("tasks", "memory_k, horizon_tau and interval must be >= 1");

  if (!j.contains("methods") || !j.at("methods").is_array() || j.at("methods").empty())
    config_error("methods", "at least one method is required");
  for (const json& jm : j.at("methods")) {
    MethodConfig mc;
    mc.name = get_field<std::string>(jm, "methods[]", "name");
    if (!is_known_method(mc.name))
      config_error("methods[]", "unknown method '" + mc.name +
                                    "' (rr | gf_lin | gf_exp | ddgda_closed | ddgda_gho)");
    const OptimizerPath path =
        mc.name == "ddgda_gho" ? OptimizerPath::gho : OptimizerPath::closed_form;
    mc.train = parse_train_config(jm, "methods." + mc.name, path);
    mc.grid = get_field_or<std::vector<double>>(jm, "methods." + mc.name, "grid", {});
    cfg.methods.push_back(std::move(mc));
  }

  cfg.downstream =
      downstream_from_string(get_field_or<std::string>(j, "(root)", "downstream", "linear"));

  cfg.metrics = get_field_or<std::vector<std::string>>(j, "(root)", "metrics", {"mse"});
  if (cfg.metrics.empty()) config_error("metrics", "at least one metric is required");
  for (const auto& name : cfg.metrics) {
    const auto& known = known_metrics();
    if (std::find(known.begin(), known.end(), name) == known.end())
      config_error("metrics", "unknown metric '" + name + "'");
  }

  cfg.seeds = get_field_or<std::vector<std::uint64_t>>(j, "(root)", "seeds", {0});
  if (cfg.seeds.empty()) config_error("seeds", "at least one seed is required");

  cfg.output_dir = get_field_or<std::string>(j, "(root)", "output_dir", "out");
  cfg.dump_weights = get_field_or(j, "(root)", "dump_weights", false);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

namespace {

struct SeedData {
  StreamPtr stream;
  TaskSplit split;
};

StreamPtr build_stream(const ScenarioConfig& sc, std::uint64_t run_seed) {
  switch (sc.kind) {
    case ScenarioConfig::Kind::gradual: {
      GradualDriftSpec spec = sc.gradual;
      spec.seed += run_seed;
      return generate_gradual(spec).stream;
    }
    case ScenarioConfig::Kind::abrupt: {
      AbruptDriftSpec spec = sc.abrupt;
      spec.seed += run_seed;
      return generate_abrupt(spec).stream;
    }
    case ScenarioConfig::Kind::csv:
      return std::make_shared<TimeIndexedStream>(
          read_stream_csv(std::filesystem::path(sc.csv_path), sc.csv_period_length));
  }
  throw Error("unreachable scenario kind");
}

SeedData build_seed_data(const ExperimentConfig& cfg, std::uint64_t run_seed) {
  SeedData data;
  data.stream = build_stream(cfg.scenario, run_seed);
  const Tick tau = cfg.tasks.horizon_follows_interval ? cfg.tasks.interval
                                                      : cfg.tasks.horizon_tau;
  TaskGenOptions opts;
  opts.allow_partial_memory = cfg.tasks.allow_partial_memory;
  auto tasks = generate_tasks(data.stream, cfg.tasks.memory_k, tau, cfg.tasks.interval, opts);
  data.split = split_tasks(std::move(tasks), cfg.tasks.split_time);
  return data;
}

std::vector<double> default_grid(const std::string& method, Tick memory_k) {
  if (method == "gf_exp") return {0.0, 0.001, 0.003, 0.01, 0.03, 0.1, 0.3};
  // Linear slopes bounded so 1 - slope*(k-1) stays >= 0 across the window.
  const double cap = memory_k > 1 ? 1.0 / static_cast<double>(memory_k - 1) : 0.0;
  std::vector<double> grid = {0.0};
  for (double f : {0.1, 0.25, 0.5, 0.75, 1.0}) grid.push_back(f * cap);
  return grid;
}

struct EvalData {
  std::vector<double> y;      // pooled labels, task then timestamp order
  std::vector<double> yhat;   // pooled predictions
  std::vector<std::vector<double>> task_y;
  std::vector<std::vector<double>> task_yhat;
};

double pooled_persistence_rmse(const EvalData& data) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& w : data.task_y) {
    for (std::size_t i = 1; i < w.size(); ++i) {
      total += (w[i] - w[i - 1]) * (w[i] - w[i - 1]);
      ++count;
    }
  }
  if (count == 0) throw Error("skill: test windows too short for a persistence forecast");
  return std::sqrt(total / static_cast<double>(count));
}

double compute_metric(const std::string& name, const EvalData& data) {
  if (name == "mse") return mse(data.y, data.yhat);
  if (name == "mae") return mae(data.y, data.yhat);
  if (name == "rmse") return rmse(data.y, data.yhat);
  if (name == "nmae") return nmae(data.y, data.yhat);
  if (name == "nrmse") return nrmse(data.y, data.yhat);
  if (name == "skill") return skill(rmse(data.y, data.yhat), pooled_persistence_rmse(data));
  if (name == "ic" || name == "icir") {
    std::vector<double> ics;
    ics.reserve(data.task_y.size());
    for (std::size_t t = 0; t < data.task_y.size(); ++t)
      ics.push_back(ic(data.task_yhat[t], data.task_y[t]));
    if (name == "icir") return icir(ics);
    double sum = 0.0;
    for (double v : ics) sum += v;
    return sum / static_cast<double>(ics.size());
  }
  throw Error("unknown metric '" + name + "'");
}

// Weights per test task for one method; fills cell.tuning / loss_history /
// model artifact as a side effect.
class MethodRunner {
public:
  MethodRunner(const ExperimentConfig& cfg, const MethodConfig& method,
               std::uint64_t run_seed, const SeedData& data, CellResult& cell,
               const std::filesystem::path& cell_dir, bool write_outputs)
      : cfg_(cfg), method_(method), data_(data), cell_(cell), cell_dir_(cell_dir),
        write_outputs_(write_outputs) {
    train_cfg_ = method.train;
    train_cfg_.seed = method.train.seed + run_seed;
  }

  void prepare() {
    if (is_ddgda(method_.name)) {
      trained_ = dda::train(data_.split.train_tasks, train_cfg_);
      cell_.loss_history = trained_->loss_history;
      if (write_outputs_) {
        const auto path = cell_dir_ / "model.json";
        save_trained(*trained_, path);
        cell_.artifacts.push_back(path.generic_string());
      }
      return;
    }
    if (method_.name == "rr") {
      spec_.scheme = ForgettingScheme::rr;
      return;
    }
    spec_.scheme = method_.name == "gf_lin" ? ForgettingScheme::gf_lin : ForgettingScheme::gf_exp;
    tune_forgetting_rate();
  }

  SampleWeights weights_for(const AdaptationTask& task) const {
    if (trained_) {
      const SimilarityFeatures feats =
          extract_features(task, trained_->period_length, trained_->model.lags(),
                           train_cfg_.feature_ridge, train_cfg_.add_bias);
      return compute_weights(trained_->model, feats);
    }
    return baseline_weights(spec_, task);
  }

  const TrainConfig& train_cfg() const { return train_cfg_; }

private:
  // Grid search on a trailing validation slice of the train tasks: the rate
  // minimizing mean test-window MSE wins, ties to the smaller rate.
  void tune_forgetting_rate() {
    const auto& train_tasks = data_.split.train_tasks;
    const std::size_t val_count = std::max<std::size_t>(1, train_tasks.size() / 4);
    const std::size_t val_begin = train_tasks.size() - val_count;

    std::vector<double> grid =
        method_.grid.empty() ? default_grid(method_.name, cfg_.tasks.memory_k) : method_.grid;

    double best_rate = 0.0, best_mse = std::numeric_limits<double>::infinity();
    bool any_ok = false;
    std::string last_error = "empty grid";
    for (double rate : grid) {
      ForgettingSpec candidate = spec_;
      if (candidate.scheme == ForgettingScheme::gf_lin)
        candidate.lin_slope = rate;
      else
        candidate.exp_rate = rate;
      try {
        double total = 0.0;
        std::size_t count = 0;
        for (std::size_t i = val_begin; i < train_tasks.size(); ++i) {
          const auto& task = train_tasks[i];
          const auto preds = fit_predict_downstream(task.train_window(),
                                                    baseline_weights(candidate, task),
                                                    task.test_window(), cfg_.downstream,
                                                    train_cfg_);
          const auto window = task.test_window();
          for (std::size_t s = 0; s < preds.size(); ++s) {
            const double err = preds[s] - window[s].label;
            total += err * err;
            ++count;
          }
        }
        const double mean = total / static_cast<double>(count);
        if (mean < best_mse) {
          best_mse = mean;
          best_rate = rate;
        }
        any_ok = true;
      } catch (const Error& e) {
        last_error = e.what();  // rate invalid for this window; skip it
      }
    }
    if (!any_ok) throw Error("forgetting grid search failed: " + last_error);

    if (spec_.scheme == ForgettingScheme::gf_lin)
      spec_.lin_slope = best_rate;
    else
      spec_.exp_rate = best_rate;
    cell_.tuning["selected_rate"] = best_rate;
    cell_.tuning["validation_mse"] = best_mse;
    cell_.tuning["validation_tasks"] = static_cast<double>(val_count);
  }

  const ExperimentConfig& cfg_;
  const MethodConfig& method_;
  const SeedData& data_;
  CellResult& cell_;
  std::filesystem::path cell_dir_;
  bool write_outputs_;
  TrainConfig train_cfg_;
  ForgettingSpec spec_;
  std::optional<TrainedResampler> trained_;
};

CellResult evaluate_cell(const ExperimentConfig& cfg, const MethodConfig& method,
                         std::uint64_t run_seed, const SeedData& data,
                         const std::filesystem::path& out_dir, bool write_outputs) {
  CellResult cell;
  cell.method = method.name;
  cell.seed = run_seed;

  const std::filesystem::path cell_dir =
      out_dir / (method.name + "_seed" + std::to_string(run_seed));
  try {
    if (write_outputs) std::filesystem::create_directories(cell_dir);

    MethodRunner runner(cfg, method, run_seed, data, cell, cell_dir, write_outputs);
    runner.prepare();

    EvalData eval;
    for (const AdaptationTask& task : data.split.test_tasks) {
      const SampleWeights q = runner.weights_for(task);
      if (cfg.dump_weights && write_outputs) {
        const auto path = cell_dir / ("weights_task_" + std::to_string(task.task_time()) + ".csv");
        write_weight_dump_csv(task, q, path);
        cell.artifacts.push_back(path.generic_string());
      }
      const auto preds = fit_predict_downstream(task.train_window(), q, task.test_window(),
                                                cfg.downstream, runner.train_cfg());
      const auto window = task.test_window();
      std::vector<double> task_y(window.size());
      for (std::size_t i = 0; i < window.size(); ++i) task_y[i] = window[i].label;
      eval.y.insert(eval.y.end(), task_y.begin(), task_y.end());
      eval.yhat.insert(eval.yhat.end(), preds.begin(), preds.end());
      eval.task_y.push_back(std::move(task_y));
      eval.task_yhat.push_back(preds);
    }

    cell.report.sample_count = static_cast<std::int64_t>(eval.y.size());
    cell.report.metadata["scenario"] = cfg.scenario.name;
    cell.report.metadata["method"] = method.name;
    cell.report.metadata["seed"] = std::to_string(run_seed);
    cell.report.metadata["downstream"] = to_string(cfg.downstream);
    cell.report.metadata["ridge_lambda"] = format_double(method.train.ridge_lambda);
    cell.report.metadata["add_bias"] = method.train.add_bias ? "true" : "false";
    for (const auto& name : cfg.metrics) cell.report.values[name] = compute_metric(name, eval);
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.error = e.what();
  }
  return cell;
}

}  // namespace

TaskSplit build_task_split(const ExperimentConfig& config, std::uint64_t run_seed) {
  return build_seed_data(config, run_seed).split;
}

bool RunManifest::all_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.ok; });
}

std::string RunManifest::metrics_csv() const {
  std::ostringstream out;
  out << metric_csv_header(metric_names) << '\n';
  for (const CellResult& cell : cells) {
    if (cell.ok) {
      out << metric_csv_row(cell.report, metric_names) << '\n';
    } else {
      out << scenario << ',' << cell.method << ',' << cell.seed;
      for (std::size_t i = 0; i < metric_names.size(); ++i) out << ',';
      out << '\n';
    }
  }
  return out.str();
}

std::string RunManifest::to_json() const {
  json cells_json = json::array();
  for (const CellResult& cell : cells) {
    json c{{"method", cell.method}, {"seed", cell.seed}, {"ok", cell.ok}};
    if (cell.ok) {
      c["metrics"] = cell.report.values;
      c["sample_count"] = cell.report.sample_count;
      c["metadata"] = cell.report.metadata;
    } else {
      c["error"] = cell.error;
    }
    if (!cell.loss_history.empty()) c["loss_history"] = cell.loss_history;
    if (!cell.tuning.empty()) c["tuning"] = cell.tuning;
    if (!cell.artifacts.empty()) c["artifacts"] = cell.artifacts;
    cells_json.push_back(std::move(c));
  }
  json j{{"scenario", scenario},
         {"metric_names", metric_names},
         {"cells", std::move(cells_json)},
         {"config", parse_json(config_echo)},
         {"wall_seconds", wall_seconds}};
  return j.dump(2);
}

RunManifest run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();

  RunManifest manifest;
  manifest.scenario = config.scenario.name;
  manifest.metric_names = config.metrics;
  manifest.config_echo = config.raw_json.empty() ? "{}" : config.raw_json;

  const std::vector<std::uint64_t> seeds =
      options.seed_override ? std::vector<std::uint64_t>{*options.seed_override} : config.seeds;
  const std::filesystem::path out_dir =
      options.out_dir_override.empty() ? config.output_dir : options.out_dir_override;
  if (options.write_outputs) std::filesystem::create_directories(out_dir);

  // Streams and task splits are immutable and shared across method cells.
  std::vector<SeedData> seed_data;
  seed_data.reserve(seeds.size());
  for (std::uint64_t s : seeds) seed_data.push_back(build_seed_data(config, s));

  struct CellJob {
    std::size_t method_idx;
    std::size_t seed_idx;
  };
  std::vector<CellJob> jobs;
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi)
    for (std::size_t si = 0; si < seeds.size(); ++si) jobs.push_back({mi, si});
  manifest.cells.resize(jobs.size());

  const int threads = std::max(1, options.threads);
  auto worker_body = [&](std::size_t job_idx) {
    const CellJob& job = jobs[job_idx];
    manifest.cells[job_idx] =
        evaluate_cell(config, config.methods[job.method_idx], seeds[job.seed_idx],
                      seed_data[job.seed_idx], out_dir, options.write_outputs);
  };
  if (threads == 1 || jobs.size() <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) worker_body(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int count = std::min<int>(threads, static_cast<int>(jobs.size()));
    for (int t = 0; t < count; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1))
          worker_body(i);
      });
    for (auto& t : pool) t.join();
  }

  manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (options.write_outputs) {
    std::ofstream csv(out_dir / "metrics.csv");
    if (!csv) throw Error("cannot write metrics.csv under " + out_dir.string());
    csv << manifest.metrics_csv();
    std::ofstream mj(out_dir / "manifest.json");
    if (!mj) throw Error("cannot write manifest.json under " + out_dir.string());
    mj << manifest.to_json() << '\n';
  }
  return manifest;
}

std::string SweepResult::consolidated_csv() const {
  std::ostringstream out;
  if (manifests.empty()) return out.str();
  out << "param,value," << metric_csv_header(manifests.front().metric_names) << '\n';
  for (std::size_t vi = 0; vi < manifests.size(); ++vi) {
    const RunManifest& m = manifests[vi];
    std::istringstream rows(m.metrics_csv());
    std::string line;
    std::getline(rows, line);  // skip header
    while (std::getline(rows, line))
      if (!line.empty()) out << param_path << ',' << format_double(values[vi]) << ',' << line << '\n';
  }
  return out.str();
}

SweepResult sweep_experiment(const ExperimentConfig& config, const std::string& param_path,
                             std::span<const double> values, const RunOptions& options) {
  if (values.empty()) throw Error("sweep: no values given");
  if (param_path.empty()) throw Error("sweep: empty param path");

  // Validate the path before any run starts.
  json base = parse_json(config.raw_json.empty() ? "{}" : config.raw_json);
  std::string pointer = "/" + param_path;
  for (auto& c : pointer)
    if (c == '.') c = '/';
  json::json_pointer ptr;
  try {
    ptr = json::json_pointer(pointer);
  } catch (const json::exception& e) {
    throw Error("sweep: bad param path '" + param_path + "': " + e.what());
  }
  if (!base.contains(ptr))
    throw Error("sweep: param path '" + param_path + "' not found in config");
  if (!base.at(ptr).is_number())
    throw Error("sweep: param path '" + param_path + "' is not a scalar number");

  SweepResult result;
  result.param_path = param_path;
  result.values.assign(values.begin(), values.end());

  const std::filesystem::path base_out =
      options.out_dir_override.empty() ? config.output_dir : options.out_dir_override;

  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    json tweaked = base;
    const double v = values[vi];
    // Preserve integer-typed fields when the value is integral.
    if (base.at(ptr).is_number_integer() && v == std::floor(v))
      tweaked[ptr] = static_cast<std::int64_t>(v);
    else
      tweaked[ptr] = v;
    ExperimentConfig cfg_v = parse_experiment_config(tweaked.dump());

    RunOptions opts_v = options;
    opts_v.out_dir_override =
        (base_out / ("sweep_" + std::to_string(vi))).generic_string();
    result.manifests.push_back(run_experiment(cfg_v, opts_v));
  }

  if (options.write_outputs) {
    std::filesystem::create_directories(base_out);
    std::ofstream out(base_out / "sweep.csv");
    if (!out) throw Error("cannot write sweep.csv under " + base_out.string());
    out << result.consolidated_csv();
  }
  return result;
}

void generate_scenario_files(const ScenarioConfig& scenario,
                             const std::filesystem::path& out_dir,
                             std::optional<std::uint64_t> seed_override) {
  std::filesystem::create_directories(out_dir);
  switch (scenario.kind) {
    case ScenarioConfig::Kind::gradual: {
      GradualDriftSpec spec = scenario.gradual;
      if (seed_override) spec.seed = *seed_override;
      const GradualStream gen = generate_gradual(spec);
      write_stream_csv(*gen.stream, out_dir / "stream.csv");
      write_weights_csv(gen.weights, gen.stream->first_tick(), out_dir / "oracle_weights.csv");
      return;
    }
    case ScenarioConfig::Kind::abrupt: {
      AbruptDriftSpec spec = scenario.abrupt;
      if (seed_override) spec.seed = *seed_override;
      const AbruptStream gen = generate_abrupt(spec);
      write_stream_csv(*gen.stream, out_dir / "stream.csv");
      std::vector<Eigen::VectorXd> per_tick;
      per_tick.reserve(static_cast<std::size_t>(gen.stream->tick_length()));
      for (Tick t = gen.stream->first_tick(); t < gen.stream->end_tick(); ++t)
        per_tick.push_back(gen.weight_at(t));
      write_weights_csv(per_tick, gen.stream->first_tick(), out_dir / "oracle_weights.csv");
      return;
    }
    case ScenarioConfig::Kind::csv:
      throw Error("generate requires a synthetic scenario (gradual | abrupt)");
  }
}

}  // namespace dda
