#include "dda/resampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "dda/csv.hpp"
#include "dda/error.hpp"
#include "dda/stats.hpp"

namespace dda {

Eigen::VectorXd ResamplerModel::parameters() const {
  Eigen::VectorXd p(parameter_count());
  p.head(weights.size()) = weights;
  p[weights.size()] = bias;
  return p;
}

void ResamplerModel::set_parameters(const Eigen::VectorXd& p) {
  if (p.size() != parameter_count())
    throw Error("resampler parameter vector has size " + std::to_string(p.size()) +
                ", expected " + std::to_string(parameter_count()));
  weights = p.head(p.size() - 1);
  bias = p[p.size() - 1];
}

ResamplerModel make_resampler(int lags, double temperature) {
  if (lags < 0) throw Error("lags must be >= 0");
  if (!(temperature > 0.0)) throw Error("temperature must be > 0");
  ResamplerModel m;
  m.weights = Eigen::VectorXd::Zero(lags + 1);
  m.bias = 0.0;
  m.temperature = temperature;
  return m;
}

namespace {

struct PeriodRange {
  std::size_t begin = 0;  // indices into the train window
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

// Contiguous sample ranges per period index (0 = most recent), with a
// partial oldest period merged into the oldest complete one.
std::vector<PeriodRange> partition_periods(std::span<const Sample> window, Tick window_end,
                                           Tick memory, Tick period_length) {
  const Tick n_complete = memory / period_length;
  if (n_complete < 1)
    throw Error("train window of " + std::to_string(memory) +
                " ticks holds no complete period of length " +
                std::to_string(period_length));

  std::vector<PeriodRange> ranges(static_cast<std::size_t>(n_complete));
  for (auto& r : ranges) {
    r.begin = window.size();
    r.end = 0;
  }

  for (std::size_t i = 0; i < window.size(); ++i) {
    const Tick age = window_end - 1 - window[i].timestamp;  // 0 = newest tick
    Tick idx = age / period_length;
    if (idx > n_complete - 1) idx = n_complete - 1;
    auto& r = ranges[static_cast<std::size_t>(idx)];
    r.begin = std::min(r.begin, i);
    r.end = std::max(r.end, i + 1);
  }
  return ranges;
}

NormalFit residual_fit(const DesignMatrix& d, const Eigen::VectorXd& phi) {
  const Eigen::VectorXd r = d.y - d.X * phi;
  return fit_normal(std::span<const double>(r.data(), static_cast<std::size_t>(r.size())),
                    kResidualVarFloor);
}

}  // namespace

SimilarityFeatures extract_features(const AdaptationTask& task, Tick period_length,
                                    int lags, double ridge_lambda, bool add_bias) {
  if (period_length < 1) throw Error("period_length must be >= 1");
  if (lags < 0) throw Error("lags must be >= 0");
  const auto window = task.train_window();
  if (window.empty()) throw Error("extract_features: empty train window");

  const auto ranges = partition_periods(window, task.task_time(), task.memory(), period_length);
  const int n_periods = static_cast<int>(ranges.size());
  if (n_periods < lags + 1)
    throw Error("train window has " + std::to_string(n_periods) +
                " complete periods, need lags+1 = " + std::to_string(lags + 1));

  const Eigen::Index coeffs =
      window.front().features.size() + (add_bias ? 1 : 0);
  for (const auto& r : ranges) {
    const std::size_t count = r.end > r.begin ? r.size() : 0;
    if (static_cast<Eigen::Index>(count) < coeffs)
      throw Error("underdetermined period fit: period with " + std::to_string(count) +
                  " samples < " + std::to_string(coeffs) + " coefficients");
  }

  // One unweighted linear fit per period, then Gaussian residual fits of
  // every period under each reference period's model.
  std::vector<DesignMatrix> designs(ranges.size());
  std::vector<Eigen::VectorXd> fits(ranges.size());
  for (std::size_t p = 0; p < ranges.size(); ++p) {
    designs[p] = build_design(window.subspan(ranges[p].begin, ranges[p].size()), add_bias);
    SampleWeights ones;
    ones.q = Eigen::VectorXd::Ones(designs[p].X.rows());
    ones.normalization = WeightNormalization::raw;
    fits[p] = solve_wls(designs[p], ones, ridge_lambda).phi();
  }

  Eigen::MatrixXd period_rows(n_periods, lags + 1);
  for (int j = 0; j <= lags; ++j) {
    const auto& phi_ref = fits[static_cast<std::size_t>(j)];
    const NormalFit ref = residual_fit(designs[static_cast<std::size_t>(j)], phi_ref);
    for (int p = 0; p < n_periods; ++p) {
      const NormalFit cur = residual_fit(designs[static_cast<std::size_t>(p)], phi_ref);
      period_rows(p, j) = -kl_normal(cur.mu, cur.sigma, ref.mu, ref.sigma);
    }
  }

  SimilarityFeatures feats;
  feats.values.resize(static_cast<Eigen::Index>(window.size()), lags + 1);
  for (std::size_t p = 0; p < ranges.size(); ++p)
    for (std::size_t i = ranges[p].begin; i < ranges[p].end; ++i)
      feats.values.row(static_cast<Eigen::Index>(i)) = period_rows.row(static_cast<int>(p));
  if (!feats.values.allFinite()) throw Error("extract_features produced non-finite values");
  return feats;
}

SampleWeights compute_weights(const ResamplerModel& model, const SimilarityFeatures& feats) {
  if (feats.values.cols() != model.weights.size())
    throw Error("similarity features have " + std::to_string(feats.values.cols()) +
                " columns, model expects " + std::to_string(model.weights.size()));
  if (!(model.temperature > 0.0)) throw Error("temperature must be > 0");

  Eigen::VectorXd logits =
      (feats.values * model.weights).array() + model.bias;
  logits /= model.temperature;
  if (!logits.allFinite()) throw Error("non-finite logits in compute_weights");

  const double zmax = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - zmax).exp();
  SampleWeights w;
  w.q = e / e.sum();
  w.normalization = WeightNormalization::probability;
  return w;
}

Eigen::MatrixXd weight_jacobian(const ResamplerModel& model, const SimilarityFeatures& feats) {
  const SampleWeights w = compute_weights(model, feats);
  const Eigen::Index n = w.q.size();
  const Eigen::Index lags1 = model.weights.size();

  Eigen::MatrixXd jac(n, model.parameter_count());
  for (Eigen::Index l = 0; l < lags1; ++l) {
    const Eigen::VectorXd col = feats.values.col(l);
    const double mean = w.q.dot(col);  // softmax coupling term
    jac.col(l) =
        w.q.cwiseProduct((col.array() - mean).matrix()) / model.temperature;
  }
  // A shared shift of all logits leaves the softmax unchanged.
  jac.col(lags1).setZero();
  return jac;
}

void write_weight_dump_csv(const AdaptationTask& task, const SampleWeights& weights,
                           std::ostream& out) {
  const auto window = task.train_window();
  if (static_cast<Eigen::Index>(window.size()) != weights.q.size())
    throw Error("weight dump: weight count does not match train window");
  out << "task_time,sample_timestamp,q\n";
  for (std::size_t i = 0; i < window.size(); ++i)
    out << task.task_time() << ',' << window[i].timestamp << ','
        << format_double(weights.q[static_cast<Eigen::Index>(i)]) << '\n';
}

void write_weight_dump_csv(const AdaptationTask& task, const SampleWeights& weights,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write weight dump: " + path.string());
  write_weight_dump_csv(task, weights, out);
}

}  // namespace dda
