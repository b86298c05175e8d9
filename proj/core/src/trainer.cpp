#include "dda/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "dda/error.hpp"

namespace dda {

using nlohmann::json;

std::string to_string(OptimizerPath path) {
  return path == OptimizerPath::closed_form ? "closed_form" : "gho";
}

std::string to_string(Downstream downstream) {
  return downstream == Downstream::linear ? "linear" : "mlp_small";
}

std::string to_string(OuterOptimizer optimizer) {
  return optimizer == OuterOptimizer::sgd ? "sgd" : "adam";
}

OptimizerPath optimizer_path_from_string(const std::string& name) {
  if (name == "closed_form") return OptimizerPath::closed_form;
  if (name == "gho") return OptimizerPath::gho;
  throw Error("unknown optimizer path '" + name + "' (closed_form | gho)");
}

Downstream downstream_from_string(const std::string& name) {
  if (name == "linear") return Downstream::linear;
  if (name == "mlp_small") return Downstream::mlp_small;
  throw Error("unknown downstream model '" + name + "' (linear | mlp_small)");
}

OuterOptimizer outer_optimizer_from_string(const std::string& name) {
  if (name == "sgd") return OuterOptimizer::sgd;
  if (name == "adam") return OuterOptimizer::adam;
  throw Error("unknown outer optimizer '" + name + "' (sgd | adam)");
}

void validate_config(const TrainConfig& cfg) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(std::string(name) + " must be > 0");
  };
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
    throw Error("learning_rate must be finite and >= 0");
  if (cfg.epochs < 1) throw Error("epochs must be >= 1");
  if (cfg.batch < 0) throw Error("batch must be >= 0");
  positive(cfg.sigma, "sigma");
  if (!(cfg.ridge_lambda >= 0.0) || !std::isfinite(cfg.ridge_lambda))
    throw Error("ridge_lambda must be finite and >= 0");
  if (!(cfg.feature_ridge >= 0.0) || !std::isfinite(cfg.feature_ridge))
    throw Error("feature_ridge must be finite and >= 0");
  if (cfg.gho_steps < 1) throw Error("gho_steps must be >= 1");
  positive(cfg.gho_inner_lr, "gho_inner_lr");
  if (!(cfg.grad_clip >= 0.0) || !std::isfinite(cfg.grad_clip))
    throw Error("grad_clip must be finite and >= 0");
  if (cfg.lags < 0) throw Error("lags must be >= 0");
  positive(cfg.temperature, "temperature");
  if (cfg.mlp_hidden < 1) throw Error("mlp_hidden must be >= 1");
  if (cfg.mlp_steps < 1) throw Error("mlp_steps must be >= 1");
  positive(cfg.mlp_lr, "mlp_lr");
}

TaskContext make_task_context(const AdaptationTask& task, const TrainConfig& cfg) {
  if (task.train_window().empty() || task.test_window().empty())
    throw Error("task at t=" + std::to_string(task.task_time()) + " has an empty window");
  TaskContext ctx;
  ctx.task_time = task.task_time();
  ctx.train = build_design(task.train_window(), cfg.add_bias);
  ctx.test = build_design(task.test_window(), cfg.add_bias);
  ctx.feats = extract_features(task, task.stream().period_length(), cfg.lags,
                               cfg.feature_ridge, cfg.add_bias);
  return ctx;
}

namespace {

TaskLossResult closed_form_loss(const ResamplerModel& model, const TaskContext& ctx,
                                const TrainConfig& cfg) {
  const SampleWeights q = compute_weights(model, ctx.feats);
  const ProxySolution sol = solve_wls(ctx.train, q, cfg.ridge_lambda);

  const double inv_sigma2 = 1.0 / (cfg.sigma * cfg.sigma);
  const Eigen::VectorXd r_test = ctx.test.X * sol.phi() - ctx.test.y;
  TaskLossResult res;
  res.loss = 0.5 * inv_sigma2 * r_test.squaredNorm();

  const Eigen::VectorXd upper_grad_phi = inv_sigma2 * (ctx.test.X.transpose() * r_test);
  const Eigen::VectorXd dldq = hypergradient_q(ctx.train, q, sol, upper_grad_phi);
  res.grad_theta = weight_jacobian(model, ctx.feats).transpose() * dldq;
  return res;
}

// Inner problem solved by gho_steps of plain gradient descent from phi_0 = 0
// on the same ridge-regularized objective the closed form minimizes; the
// theta-gradient is the exact reverse-mode derivative of the unrolled loop.
TaskLossResult gho_loss(const ResamplerModel& model, const TaskContext& ctx,
                        const TrainConfig& cfg) {
  const SampleWeights q = compute_weights(model, ctx.feats);
  const Eigen::Index p = ctx.train.X.cols();
  const double lr = cfg.gho_inner_lr;

  Eigen::MatrixXd gram = ctx.train.X.transpose() * q.q.asDiagonal() * ctx.train.X;
  gram.diagonal().array() += cfg.ridge_lambda;
  const Eigen::VectorXd rhs = ctx.train.X.transpose() * q.q.cwiseProduct(ctx.train.y);

  std::vector<Eigen::VectorXd> iterates;
  iterates.reserve(static_cast<std::size_t>(cfg.gho_steps));
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(p);
  for (int s = 0; s < cfg.gho_steps; ++s) {
    iterates.push_back(phi);
    phi -= lr * (gram * phi - rhs);
  }
  if (!phi.allFinite())
    throw Error("gho inner iteration diverged on task t=" + std::to_string(ctx.task_time) +
                "; reduce gho_inner_lr");

  const double inv_sigma2 = 1.0 / (cfg.sigma * cfg.sigma);
  const Eigen::VectorXd r_test = ctx.test.X * phi - ctx.test.y;
  TaskLossResult res;
  res.loss = 0.5 * inv_sigma2 * r_test.squaredNorm();

  // Reverse pass: u_s = (I - lr A)^{k-1-s} g accumulated against phi_s.
  Eigen::VectorXd u = inv_sigma2 * (ctx.test.X.transpose() * r_test);
  Eigen::VectorXd u_sum = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd outer_sum = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t s = iterates.size(); s-- > 0;) {
    u_sum += u;
    outer_sum.noalias() += u * iterates[s].transpose();
    u -= lr * (gram * u);
  }
  const Eigen::VectorXd dldq =
      lr * (ctx.train.y.cwiseProduct(ctx.train.X * u_sum) -
            ((ctx.train.X * outer_sum).cwiseProduct(ctx.train.X)).rowwise().sum());
  res.grad_theta = weight_jacobian(model, ctx.feats).transpose() * dldq;
  return res;
}

}  // namespace

TaskLossResult task_loss(const ResamplerModel& model, const TaskContext& ctx,
                         const TrainConfig& cfg) {
  TaskLossResult res = cfg.optimizer_path == OptimizerPath::closed_form
                           ? closed_form_loss(model, ctx, cfg)
                           : gho_loss(model, ctx, cfg);
  if (!std::isfinite(res.loss) || !res.grad_theta.allFinite())
    throw Error("non-finite task loss on task t=" + std::to_string(ctx.task_time));
  return res;
}

TaskLossResult task_loss(const ResamplerModel& model, const AdaptationTask& task,
                         const TrainConfig& cfg) {
  return task_loss(model, make_task_context(task, cfg), cfg);
}

TrainedResampler train(std::span<const AdaptationTask> tasks, const TrainConfig& cfg) {
  validate_config(cfg);
  if (tasks.empty()) throw Error("train: task list is empty");

  std::vector<TaskContext> contexts;
  contexts.reserve(tasks.size());
  for (const AdaptationTask& t : tasks) contexts.push_back(make_task_context(t, cfg));

  TrainedResampler out;
  out.model = make_resampler(cfg.lags, cfg.temperature);
  out.period_length = tasks.front().stream().period_length();
  out.config_echo = cfg;

  const int n = static_cast<int>(contexts.size());
  const int batch = cfg.batch <= 0 ? n : std::min(cfg.batch, n);
  std::vector<int> order(contexts.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed);

  Eigen::VectorXd adam_m = Eigen::VectorXd::Zero(out.model.parameter_count());
  Eigen::VectorXd adam_v = Eigen::VectorXd::Zero(out.model.parameter_count());
  long adam_t = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (int start = 0; start < n; start += batch) {
      const int stop = std::min(start + batch, n);
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(out.model.parameter_count());
      for (int i = start; i < stop; ++i) {
        TaskLossResult res;
        try {
          res = task_loss(out.model, contexts[static_cast<std::size_t>(order[i])], cfg);
        } catch (const Error& e) {
          throw Error("training aborted at epoch " + std::to_string(epoch) + ": " + e.what());
        }
        epoch_loss += res.loss;
        grad += res.grad_theta;
      }
      grad /= static_cast<double>(stop - start);
      if (cfg.grad_clip > 0.0) {
        const double norm = grad.norm();
        if (norm > cfg.grad_clip) grad *= cfg.grad_clip / norm;
      }
      if (cfg.learning_rate != 0.0) {
        Eigen::VectorXd step;
        if (cfg.outer_optimizer == OuterOptimizer::adam) {
          constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
          ++adam_t;
          adam_m = beta1 * adam_m + (1.0 - beta1) * grad;
          adam_v = beta2 * adam_v.array() + (1.0 - beta2) * grad.array().square();
          const Eigen::VectorXd m_hat = adam_m / (1.0 - std::pow(beta1, adam_t));
          const Eigen::VectorXd v_hat = adam_v / (1.0 - std::pow(beta2, adam_t));
          step = m_hat.array() / (v_hat.array().sqrt() + eps);
        } else {
          step = grad;
        }
        out.model.set_parameters(out.model.parameters() - cfg.learning_rate * step);
      }
      if (!out.model.parameters().allFinite())
        throw Error("training diverged: non-finite parameters at epoch " +
                    std::to_string(epoch));
    }
    out.loss_history.push_back(epoch_loss / static_cast<double>(n));
  }
  return out;
}

namespace {

// Minimal one-hidden-layer regressor: tanh hidden units, weighted squared
// loss, fixed-seed full-batch gradient descent.
class MlpRegressor {
public:
  MlpRegressor(Eigen::Index input_dim, int hidden, std::uint64_t seed)
      : w1_(hidden, input_dim), b1_(Eigen::VectorXd::Zero(hidden)),
        w2_(hidden), b2_(0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (Eigen::Index i = 0; i < w1_.rows(); ++i)
      for (Eigen::Index j = 0; j < w1_.cols(); ++j) w1_(i, j) = s1 * gauss(rng);
    for (Eigen::Index i = 0; i < w2_.size(); ++i) w2_[i] = s2 * gauss(rng);
  }

  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& q,
           int steps, double lr) {
    for (int s = 0; s < steps; ++s) {
      const Eigen::MatrixXd h =
          ((x * w1_.transpose()).rowwise() + b1_.transpose()).array().tanh();
      const Eigen::VectorXd pred = (h * w2_).array() + b2_;
      const Eigen::VectorXd dpred = q.cwiseProduct(pred - y);

      const Eigen::VectorXd dw2 = h.transpose() * dpred;
      const double db2 = dpred.sum();
      const Eigen::MatrixXd dz =
          (dpred * w2_.transpose()).cwiseProduct((1.0 - h.array().square()).matrix());
      const Eigen::MatrixXd dw1 = dz.transpose() * x;
      const Eigen::VectorXd db1 = dz.colwise().sum();

      w1_ -= lr * dw1;
      b1_ -= lr * db1;
      w2_ -= lr * dw2;
      b2_ -= lr * db2;
    }
    if (!w1_.allFinite() || !w2_.allFinite())
      throw Error("mlp_small training diverged; reduce mlp_lr");
  }

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const {
    const Eigen::MatrixXd h =
        ((x * w1_.transpose()).rowwise() + b1_.transpose()).array().tanh();
    return (h * w2_).array() + b2_;
  }

private:
  Eigen::MatrixXd w1_;
  Eigen::VectorXd b1_;
  Eigen::VectorXd w2_;
  double b2_;
};

}  // namespace

std::vector<double> fit_predict_downstream(std::span<const Sample> train_window,
                                           const SampleWeights& weights,
                                           std::span<const Sample> test_window,
                                           Downstream downstream, const TrainConfig& cfg) {
  if (train_window.empty() || test_window.empty())
    throw Error("fit_predict_downstream: empty window");

  Eigen::VectorXd pred;
  if (downstream == Downstream::linear) {
    const DesignMatrix train = build_design(train_window, cfg.add_bias);
    const DesignMatrix test = build_design(test_window, cfg.add_bias);
    const ProxySolution sol = solve_wls(train, weights, cfg.ridge_lambda);
    pred = test.X * sol.phi();
  } else {
    const DesignMatrix train = build_design(train_window, /*add_bias=*/false);
    const DesignMatrix test = build_design(test_window, /*add_bias=*/false);
    validate_weights(weights);
    if (weights.q.size() != train.X.rows())
      throw Error("fit_predict_downstream: weight count mismatch");
    MlpRegressor mlp(train.X.cols(), cfg.mlp_hidden, cfg.seed);
    mlp.fit(train.X, train.y, weights.q, cfg.mlp_steps, cfg.mlp_lr);
    pred = mlp.predict(test.X);
  }
  if (!pred.allFinite()) throw Error("downstream model produced non-finite predictions");
  return {pred.data(), pred.data() + pred.size()};
}

std::vector<double> forecast(const TrainedResampler& trained, const AdaptationTask& task,
                             Downstream downstream, const TrainConfig& cfg) {
  const SimilarityFeatures feats = extract_features(
      task, trained.period_length, trained.model.lags(), cfg.feature_ridge, cfg.add_bias);
  const SampleWeights q = compute_weights(trained.model, feats);
  return fit_predict_downstream(task.train_window(), q, task.test_window(), downstream, cfg);
}

namespace {

json config_to_json(const TrainConfig& cfg) {
  return json{{"learning_rate", cfg.learning_rate},
              {"epochs", cfg.epochs},
              {"batch", cfg.batch},
              {"sigma", cfg.sigma},
              {"ridge_lambda", cfg.ridge_lambda},
              {"seed", cfg.seed},
              {"optimizer_path", to_string(cfg.optimizer_path)},
              {"gho_steps", cfg.gho_steps},
              {"gho_inner_lr", cfg.gho_inner_lr},
              {"grad_clip", cfg.grad_clip},
              {"feature_ridge", cfg.feature_ridge},
              {"outer_optimizer", to_string(cfg.outer_optimizer)},
              {"lags", cfg.lags},
              {"temperature", cfg.temperature},
              {"add_bias", cfg.add_bias},
              {"mlp_hidden", cfg.mlp_hidden},
              {"mlp_steps", cfg.mlp_steps},
              {"mlp_lr", cfg.mlp_lr}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.epochs = j.at("epochs").get<int>();
  cfg.batch = j.at("batch").get<int>();
  cfg.sigma = j.at("sigma").get<double>();
  cfg.ridge_lambda = j.at("ridge_lambda").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.optimizer_path = optimizer_path_from_string(j.at("optimizer_path").get<std::string>());
  cfg.gho_steps = j.at("gho_steps").get<int>();
  cfg.gho_inner_lr = j.at("gho_inner_lr").get<double>();
  cfg.grad_clip = j.value("grad_clip", cfg.grad_clip);
  cfg.feature_ridge = j.value("feature_ridge", cfg.feature_ridge);
  cfg.outer_optimizer =
      outer_optimizer_from_string(j.value("outer_optimizer", to_string(cfg.outer_optimizer)));
  cfg.lags = j.at("lags").get<int>();
  cfg.temperature = j.at("temperature").get<double>();
  cfg.add_bias = j.at("add_bias").get<bool>();
  cfg.mlp_hidden = j.at("mlp_hidden").get<int>();
  cfg.mlp_steps = j.at("mlp_steps").get<int>();
  cfg.mlp_lr = j.at("mlp_lr").get<double>();
  return cfg;
}

}  // namespace

std::string to_json(const TrainedResampler& trained) {
  const Eigen::VectorXd params = trained.model.parameters();
  json j{{"parameters", std::vector<double>(params.data(), params.data() + params.size())},
         {"temperature", trained.model.temperature},
         {"lags", trained.model.lags()},
         {"period_length", trained.period_length},
         {"loss_history", trained.loss_history},
         {"config_echo", config_to_json(trained.config_echo)}};
  return j.dump(2);
}

TrainedResampler trained_resampler_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("bad trained-model json: ") + e.what());
  }
  try {
    TrainedResampler out;
    const int lags = j.at("lags").get<int>();
    out.model = make_resampler(lags, j.at("temperature").get<double>());
    const auto params = j.at("parameters").get<std::vector<double>>();
    out.model.set_parameters(
        Eigen::Map<const Eigen::VectorXd>(params.data(), static_cast<Eigen::Index>(params.size())));
    out.period_length = j.at("period_length").get<Tick>();
    out.loss_history = j.value("loss_history", std::vector<double>{});
    out.config_echo = config_from_json(j.at("config_echo"));
    return out;
  } catch (const json::exception& e) {
    throw Error(std::string("bad trained-model json: ") + e.what());
  }
}

void save_trained(const TrainedResampler& trained, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file: " + path.string());
  out << to_json(trained) << '\n';
}

TrainedResampler load_trained(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return trained_resampler_from_json(buf.str());
}

}  // namespace dda
