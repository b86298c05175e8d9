#pragma once

#include <filesystem>
#include <iosfwd>

#include <Eigen/Core>

#include "dda/stream.hpp"
#include "dda/wls.hpp"

namespace dda {

// Variance floor used when fitting Gaussians to period residuals, so that
// noiseless periods keep a positive sigma and finite KL.
inline constexpr double kResidualVarFloor = 1e-9;

// Per-sample distribution-similarity features: row i holds the similarity of
// sample i's period to the window's most recent periods at lags 0..lags.
// Samples in the same period share an identical row.
struct SimilarityFeatures {
  Eigen::MatrixXd values;  // n x (lags + 1)
};

// The resampler M_theta: a linear map from similarity features to one logit
// per sample, followed by a temperature softmax. Parameter layout is
// [weights (lags+1), bias]; the bias is kept for the declared parameter
// count even though a shared logit shift cannot move the softmax.
struct ResamplerModel {
  Eigen::VectorXd weights;  // lags + 1
  double bias = 0.0;
  double temperature = 1.0;

  int lags() const { return static_cast<int>(weights.size()) - 1; }
  Eigen::Index parameter_count() const { return weights.size() + 1; }

  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& p);
};

// Zero-initialized model: uniform resampling weights.
ResamplerModel make_resampler(int lags, double temperature = 1.0);

// Partition the task's train window into periods of `period_length` ticks
// counted back from the window end (a partial oldest period is merged into
// its neighbor). For each period P and reference period R at lag j from the
// window end: fit an unweighted linear model on R, fit Gaussians to the
// residuals of P and of R under that model, and set
//   similarity(P, R) = -KL(N_P || N_R).
// Throws "underdetermined period fit" when a period holds fewer samples than
// fitted coefficients, and rejects windows with fewer than lags+1 periods.
SimilarityFeatures extract_features(const AdaptationTask& task, Tick period_length,
                                    int lags, double ridge_lambda = kDefaultRidge,
                                    bool add_bias = true);

// q = softmax((feats . weights + bias) / temperature); probability-normalized.
SampleWeights compute_weights(const ResamplerModel& model, const SimilarityFeatures& feats);

// Exact Jacobian dq/dTheta, n x parameter_count.
Eigen::MatrixXd weight_jacobian(const ResamplerModel& model, const SimilarityFeatures& feats);

// Weight dump for case-study inspection: `task_time,sample_timestamp,q`.
void write_weight_dump_csv(const AdaptationTask& task, const SampleWeights& weights,
                           std::ostream& out);
void write_weight_dump_csv(const AdaptationTask& task, const SampleWeights& weights,
                           const std::filesystem::path& path);

}  // namespace dda
