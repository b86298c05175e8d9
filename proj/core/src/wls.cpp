#include "dda/wls.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "dda/error.hpp"

namespace dda {

DesignMatrix build_design(std::span<const Sample> window, bool add_bias) {
  if (window.empty()) throw Error("build_design: empty window");
  const Eigen::Index n = static_cast<Eigen::Index>(window.size());
  const Eigen::Index m = window.front().features.size();
  DesignMatrix d;
  d.X.resize(n, add_bias ? m + 1 : m);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.X.row(i).head(m) = window[static_cast<std::size_t>(i)].features;
    if (add_bias) d.X(i, m) = 1.0;
    d.y[i] = window[static_cast<std::size_t>(i)].label;
  }
  return d;
}

void validate_weights(const SampleWeights& weights) {
  if (weights.q.size() == 0) throw Error("weights: empty");
  if (!weights.q.allFinite()) throw Error("weights: non-finite entry");
  if ((weights.q.array() < 0.0).any()) throw Error("weights: negative entry");
  if (weights.normalization == WeightNormalization::probability) {
    const double sum = weights.q.sum();
    if (std::abs(sum - 1.0) > 1e-9)
      throw Error("weights: probability normalization violated, sum = " +
                  std::to_string(sum));
  }
}

SampleWeights uniform_weights(Eigen::Index n) {
  SampleWeights w;
  w.q = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  w.normalization = WeightNormalization::probability;
  return w;
}

Eigen::VectorXd ProxySolution::solve_gram(const Eigen::VectorXd& rhs) const {
  return factor_.solve(rhs);
}

namespace {

void check_dims(const DesignMatrix& data, const SampleWeights& weights) {
  if (data.X.rows() != data.y.size())
    throw Error("design matrix rows (" + std::to_string(data.X.rows()) +
                ") != label count (" + std::to_string(data.y.size()) + ")");
  if (data.X.rows() != weights.q.size())
    throw Error("weight count (" + std::to_string(weights.q.size()) +
                ") != sample count (" + std::to_string(data.X.rows()) + ")");
  if (data.X.rows() < 1) throw Error("design matrix must have n >= 1");
  if (!data.X.allFinite() || !data.y.allFinite())
    throw Error("design matrix contains non-finite entries");
}

Eigen::MatrixXd gram_matrix(const DesignMatrix& data, const SampleWeights& weights,
                            double ridge_lambda) {
  Eigen::MatrixXd a = data.X.transpose() * weights.q.asDiagonal() * data.X;
  a.diagonal().array() += ridge_lambda;
  return a;
}

}  // namespace

ProxySolution solve_wls(const DesignMatrix& data, const SampleWeights& weights,
                        double ridge_lambda) {
  check_dims(data, weights);
  validate_weights(weights);
  if (!(ridge_lambda >= 0.0) || !std::isfinite(ridge_lambda))
    throw Error("ridge_lambda must be finite and >= 0");

  ProxySolution sol;
  sol.ridge_lambda_ = ridge_lambda;
  sol.gram_ = gram_matrix(data, weights, ridge_lambda);
  const Eigen::VectorXd rhs = data.X.transpose() * weights.q.cwiseProduct(data.y);

  if (ridge_lambda == 0.0) {
    // A consistent singular system can still pass a residual check, so the
    // unridged path needs an explicit rank test.
    const auto rank = Eigen::FullPivLU<Eigen::MatrixXd>(sol.gram_).rank();
    if (rank < sol.gram_.rows())
      throw Error("singular normal equations: X'QX has rank " + std::to_string(rank) +
                  " < " + std::to_string(sol.gram_.rows()) + " and ridge_lambda is 0");
  }

  sol.factor_.compute(sol.gram_);
  sol.phi_ = sol.factor_.solve(rhs);

  const double scale = std::max(1.0, rhs.norm());
  const double resid = (sol.gram_ * sol.phi_ - rhs).norm() / scale;
  if (!sol.phi_.allFinite() || resid > kSolveResidualTol)
    throw Error("wls solve failed residual check: relative residual " +
                std::to_string(resid));
  return sol;
}

double wls_loss(const DesignMatrix& data, const SampleWeights& weights,
                const Eigen::VectorXd& phi) {
  check_dims(data, weights);
  if (phi.size() != data.X.cols())
    throw Error("wls_loss: phi has " + std::to_string(phi.size()) +
                " coefficients, design has " + std::to_string(data.X.cols()));
  const Eigen::VectorXd r = data.X * phi - data.y;
  return 0.5 * r.cwiseAbs2().dot(weights.q);
}

Eigen::VectorXd hypergradient_q(const DesignMatrix& data, const SampleWeights& weights,
                                const ProxySolution& solution,
                                const Eigen::VectorXd& upper_grad_phi) {
  check_dims(data, weights);
  if (upper_grad_phi.size() != data.X.cols())
    throw Error("hypergradient_q: upper_grad_phi dimension mismatch");

  // The cached factorization must still describe this (data, weights) pair.
  const Eigen::MatrixXd fresh = gram_matrix(data, weights, solution.ridge_lambda());
  const double scale = std::max(1.0, solution.gram().cwiseAbs().maxCoeff());
  if ((fresh - solution.gram()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw Error("stale factorization: gram matrix changed since solve_wls");

  const Eigen::VectorXd v = solution.solve_gram(upper_grad_phi);
  const Eigen::VectorXd residual = data.y - data.X * solution.phi();
  return (data.X * v).cwiseProduct(residual);
}

}  // namespace dda
