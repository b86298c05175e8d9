#include <doctest.h>

#include <cmath>
#include <random>

#include "dda/baselines.hpp"
#include "dda/drift_gen.hpp"
#include "dda/error.hpp"
#include "dda/experiment.hpp"
#include "dda/metrics.hpp"
#include "dda/trainer.hpp"
#include "test_util.hpp"

using namespace dda;
using namespace dda::testing;

namespace {

// Compact task family for gradient checks: m=2 features, 6 periods of 10.
std::vector<AdaptationTask> small_tasks(double rotation, double noise, std::uint64_t seed,
                                        Tick length = 160) {
  GradualDriftSpec spec;
  spec.feature_dim = 2;
  spec.total_length = length;
  spec.rotation_rate = rotation;
  spec.noise_std = noise;
  spec.seed = seed;
  spec.period_length = 10;
  return generate_tasks(generate_gradual(spec).stream, 60, 10, 30);
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.lags = 2;
  cfg.epochs = 5;
  cfg.learning_rate = 0.1;
  return cfg;
}

Eigen::VectorXd fd_grad_theta(const AdaptationTask& task, const TrainConfig& cfg,
                              const ResamplerModel& model, double step = 1e-5) {
  const Eigen::VectorXd theta = model.parameters();
  Eigen::VectorXd fd(theta.size());
  for (Eigen::Index p = 0; p < theta.size(); ++p) {
    auto loss_at = [&](const Eigen::VectorXd& params) {
      ResamplerModel perturbed = model;
      perturbed.set_parameters(params);
      return task_loss(perturbed, task, cfg).loss;
    };
    fd[p] = central_difference(loss_at, theta, p, step);
  }
  return fd;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("stationary noiseless task has zero loss at theta = 0") {
  const auto tasks = small_tasks(0.0, 0.0, 51);
  const TrainConfig cfg = small_config();
  const auto res = task_loss(make_resampler(cfg.lags), tasks.front(), cfg);
  CHECK(res.loss < 1e-10);
}

TEST_CASE("closed-form grad_theta matches finite differences") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const TrainConfig cfg = small_config();
  for (int trial = 0; trial < 12; ++trial) {
    const auto tasks = small_tasks(0.02, 0.3, 100 + static_cast<std::uint64_t>(trial));
    ResamplerModel model = make_resampler(cfg.lags);
    for (Eigen::Index j = 0; j < model.weights.size(); ++j) model.weights[j] = 0.3 * gauss(rng);

    const auto res = task_loss(model, tasks.front(), cfg);
    const Eigen::VectorXd fd = fd_grad_theta(tasks.front(), cfg, model);
    CHECK(gradient_rel_error(res.grad_theta, fd) <= 1e-4);
  }
}

TEST_CASE("gho grad_theta matches finite differences through the unrolled steps") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> gauss(0.0, 1.0);
  TrainConfig cfg = small_config();
  cfg.optimizer_path = OptimizerPath::gho;
  cfg.gho_steps = 7;
  cfg.gho_inner_lr = 0.05;
  for (int trial = 0; trial < 8; ++trial) {
    const auto tasks = small_tasks(0.02, 0.3, 200 + static_cast<std::uint64_t>(trial));
    ResamplerModel model = make_resampler(cfg.lags);
    for (Eigen::Index j = 0; j < model.weights.size(); ++j) model.weights[j] = 0.3 * gauss(rng);

    const auto res = task_loss(model, tasks.front(), cfg);
    const Eigen::VectorXd fd = fd_grad_theta(tasks.front(), cfg, model);
    CHECK(gradient_rel_error(res.grad_theta, fd) <= 1e-4);
  }
}

TEST_CASE("many inner steps drive the gho loss to the closed-form loss") {
  const auto tasks = small_tasks(0.015, 0.2, 77);
  TrainConfig closed = small_config();
  TrainConfig gho = closed;
  gho.optimizer_path = OptimizerPath::gho;
  gho.gho_steps = 10000;
  gho.gho_inner_lr = 0.1;

  ResamplerModel model = make_resampler(closed.lags);
  model.weights << 0.4, -0.2, 0.1;

  double previous_gap = std::numeric_limits<double>::infinity();
  for (int steps : {1, 10, 100, 10000}) {
    gho.gho_steps = steps;
    const double closed_loss = task_loss(model, tasks.front(), closed).loss;
    const double gho_loss = task_loss(model, tasks.front(), gho).loss;
    const double gap = std::abs(gho_loss - closed_loss);
    CHECK(gap <= previous_gap + 1e-12);
    previous_gap = gap;
    if (steps == 10000) CHECK(gap <= 1e-4);
  }
}

TEST_CASE("zero learning rate leaves theta unchanged") {
  const auto tasks = small_tasks(0.01, 0.1, 31);
  TrainConfig cfg = small_config();
  cfg.learning_rate = 0.0;
  cfg.epochs = 1;
  const TrainedResampler trained = train(tasks, cfg);
  CHECK(trained.model.parameters().cwiseAbs().maxCoeff() == 0.0);
  CHECK(trained.loss_history.size() == 1);
}

TEST_CASE("training reduces the loss on a predictable drift stream") {
  GradualDriftSpec spec;
  spec.feature_dim = 3;
  spec.total_length = 500;
  spec.rotation_rate = 0.01;
  spec.noise_std = 0.1;
  spec.seed = 42;
  spec.period_length = 15;
  const auto tasks = generate_tasks(generate_gradual(spec).stream, 90, 15, 15);

  TrainConfig cfg;
  cfg.lags = 3;
  cfg.epochs = 20;
  cfg.learning_rate = 0.1;
  const TrainedResampler trained = train(tasks, cfg);
  REQUIRE(trained.loss_history.size() == 20);
  CHECK(trained.loss_history.back() < trained.loss_history.front());
}

TEST_CASE("training is deterministic given the seed") {
  const auto tasks = small_tasks(0.02, 0.2, 9);
  TrainConfig cfg = small_config();
  cfg.epochs = 4;
  cfg.batch = 2;
  cfg.seed = 1234;
  const TrainedResampler a = train(tasks, cfg);
  const TrainedResampler b = train(tasks, cfg);
  CHECK((a.model.parameters() - b.model.parameters()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.loss_history == b.loss_history);
}

TEST_CASE("theta = 0 forecasts identically to the rr baseline") {
  const auto tasks = small_tasks(0.02, 0.3, 63);
  TrainConfig cfg = small_config();
  cfg.learning_rate = 0.0;
  cfg.epochs = 1;
  const TrainedResampler trained = train(tasks, cfg);
  for (const auto& task : tasks) {
    const auto ddgda = forecast(trained, task, Downstream::linear, cfg);
    const auto rr = fit_predict_downstream(task.train_window(),
                                           baseline_weights({ForgettingScheme::rr}, task),
                                           task.test_window(), Downstream::linear, cfg);
    REQUIRE(ddgda.size() == rr.size());
    for (std::size_t i = 0; i < rr.size(); ++i)
      CHECK(std::abs(ddgda[i] - rr[i]) <= 1e-10);
  }
}

TEST_CASE("noiseless static concept forecasts with zero test error") {
  const auto tasks = small_tasks(0.0, 0.0, 8);
  TrainConfig cfg = small_config();
  const TrainedResampler trained = train(std::span(tasks).first(1), cfg);
  const auto preds = forecast(trained, tasks.front(), Downstream::linear, cfg);
  const auto window = tasks.front().test_window();
  double worst = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    worst = std::max(worst, std::abs(preds[i] - window[i].label));
  CHECK(worst * worst < 1e-10);
}

TEST_CASE("trained resampler beats rr on predictable drift tasks") {
  GradualDriftSpec spec;
  spec.feature_dim = 4;
  spec.total_length = 700;
  spec.rotation_rate = 0.012;
  spec.noise_std = 0.1;
  spec.seed = 3;
  spec.period_length = 15;
  auto tasks = generate_tasks(generate_gradual(spec).stream, 120, 15, 15);
  const auto split = split_tasks(std::move(tasks), 450);

  TrainConfig cfg;
  cfg.lags = 3;
  cfg.epochs = 40;
  cfg.learning_rate = 0.1;
  const TrainedResampler trained = train(split.train_tasks, cfg);

  double ddgda_total = 0.0, rr_total = 0.0;
  for (const auto& task : split.test_tasks) {
    const auto window = task.test_window();
    std::vector<double> labels(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) labels[i] = window[i].label;
    const auto ddgda = forecast(trained, task, Downstream::linear, cfg);
    const auto rr = fit_predict_downstream(task.train_window(),
                                           baseline_weights({ForgettingScheme::rr}, task),
                                           task.test_window(), Downstream::linear, cfg);
    ddgda_total += mse(labels, ddgda);
    rr_total += mse(labels, rr);
  }
  CHECK(ddgda_total < rr_total);
}

TEST_CASE("mlp downstream is deterministic and learns a linear map") {
  const auto tasks = small_tasks(0.0, 0.05, 19);
  TrainConfig cfg = small_config();
  cfg.mlp_steps = 800;
  cfg.mlp_lr = 0.1;
  const auto& task = tasks.front();
  const SampleWeights q = uniform_weights(static_cast<Eigen::Index>(task.train_window().size()));

  const auto a = fit_predict_downstream(task.train_window(), q, task.test_window(),
                                        Downstream::mlp_small, cfg);
  const auto b = fit_predict_downstream(task.train_window(), q, task.test_window(),
                                        Downstream::mlp_small, cfg);
  CHECK(a == b);

  const auto window = task.test_window();
  std::vector<double> labels(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) labels[i] = window[i].label;
  CHECK(rmse(labels, a) < 0.5);  // crude fit beats the trivial zero predictor
}

TEST_CASE("trained model serialization round trip") {
  const auto tasks = small_tasks(0.02, 0.2, 4);
  TrainConfig cfg = small_config();
  cfg.epochs = 3;
  const TrainedResampler trained = train(tasks, cfg);

  const TrainedResampler back = trained_resampler_from_json(to_json(trained));
  CHECK((back.model.parameters() - trained.model.parameters()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.model.temperature == trained.model.temperature);
  CHECK(back.period_length == trained.period_length);
  CHECK(back.config_echo.epochs == cfg.epochs);
  CHECK(back.config_echo.optimizer_path == cfg.optimizer_path);
}

TEST_CASE("config validation rejects bad values") {
  TrainConfig cfg;
  cfg.sigma = 0.0;
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg = TrainConfig{};
  cfg.epochs = 0;
  CHECK_THROWS_AS(validate_config(cfg), Error);
  cfg = TrainConfig{};
  cfg.gho_inner_lr = -1.0;
  CHECK_THROWS_AS(validate_config(cfg), Error);
}

}  // TEST_SUITE
