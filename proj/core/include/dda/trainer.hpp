#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dda/resampler.hpp"
#include "dda/stats.hpp"
#include "dda/stream.hpp"
#include "dda/wls.hpp"

namespace dda {

enum class OptimizerPath { closed_form, gho };
enum class Downstream { linear, mlp_small };
enum class OuterOptimizer { sgd, adam };

std::string to_string(OptimizerPath path);
std::string to_string(Downstream downstream);
std::string to_string(OuterOptimizer optimizer);
OptimizerPath optimizer_path_from_string(const std::string& name);
Downstream downstream_from_string(const std::string& name);
OuterOptimizer outer_optimizer_from_string(const std::string& name);

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 50;
  int batch = 0;  // tasks per gradient step; 0 = full batch
  double sigma = 1.0;  // conditional-Gaussian scale; folds into the loss as 1/sigma^2
  double ridge_lambda = kDefaultRidge;
  std::uint64_t seed = 0;
  OptimizerPath optimizer_path = OptimizerPath::closed_form;
  int gho_steps = 10;
  double gho_inner_lr = 0.1;
  // L2 clip on the batch gradient before the update; the KL-based similarity
  // features are unbounded below, so raw gradient magnitudes can dwarf the
  // useful theta scale. 0 disables clipping.
  double grad_clip = 10.0;
  // Outer update rule for theta. The similarity columns differ in scale by
  // orders of magnitude, which conditions plain sgd badly; adam equalizes
  // the per-coordinate steps.
  OuterOptimizer outer_optimizer = OuterOptimizer::sgd;

  // Resampler shape and feature extraction.
  int lags = 3;
  double temperature = 1.0;
  bool add_bias = true;
  // Ridge for the per-period feature-extraction fits. Those fits see one
  // period of raw-weighted samples, a different scale than the q-weighted
  // proxy solve, so they get their own knob.
  double feature_ridge = kDefaultRidge;

  // mlp_small downstream model.
  int mlp_hidden = 16;
  int mlp_steps = 400;
  double mlp_lr = 0.05;
};

void validate_config(const TrainConfig& cfg);

// Theta-independent per-task cache: design matrices and similarity features
// are fixed once the task is fixed, so they are extracted a single time and
// shared across every epoch.
struct TaskContext {
  Tick task_time = 0;
  DesignMatrix train;
  DesignMatrix test;
  SimilarityFeatures feats;
};

TaskContext make_task_context(const AdaptationTask& task, const TrainConfig& cfg);

struct TaskLossResult {
  double loss = 0.0;
  Eigen::VectorXd grad_theta;
};

// Upper-level loss of one task: q = M_theta(features), phi from the weighted
// proxy fit on the train window, loss = 1/(2 sigma^2) * sum over the test
// window of (x.phi - y)^2, with grad_theta chained exactly through the
// proxy solution (closed_form) or through the unrolled inner gradient steps
// (gho, phi_0 = 0).
TaskLossResult task_loss(const ResamplerModel& model, const TaskContext& ctx,
                         const TrainConfig& cfg);
TaskLossResult task_loss(const ResamplerModel& model, const AdaptationTask& task,
                         const TrainConfig& cfg);

struct TrainedResampler {
  ResamplerModel model;
  Tick period_length = 1;
  std::vector<double> loss_history;  // mean task loss per epoch
  TrainConfig config_echo;
};

// Stochastic gradient descent on theta over the training tasks. Theta starts
// at zero (uniform resampling), so training begins exactly at the RR
// baseline. Deterministic given cfg.seed.
TrainedResampler train(std::span<const AdaptationTask> tasks, const TrainConfig& cfg);

// Train the downstream model on the task's train window with per-sample
// weights q and predict every test-window sample in timestamp order.
std::vector<double> fit_predict_downstream(std::span<const Sample> train_window,
                                           const SampleWeights& weights,
                                           std::span<const Sample> test_window,
                                           Downstream downstream, const TrainConfig& cfg);

std::vector<double> forecast(const TrainedResampler& trained, const AdaptationTask& task,
                             Downstream downstream, const TrainConfig& cfg);

// Flat JSON round trip: parameter vector, temperature, lags, period_length,
// config echo.
std::string to_json(const TrainedResampler& trained);
TrainedResampler trained_resampler_from_json(const std::string& text);
void save_trained(const TrainedResampler& trained, const std::filesystem::path& path);
TrainedResampler load_trained(const std::filesystem::path& path);

}  // namespace dda
