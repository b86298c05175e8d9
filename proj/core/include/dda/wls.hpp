#pragma once

#include <span>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "dda/stream.hpp"

namespace dda {

// Default ridge strength for every normal-equations solve in the project.
inline constexpr double kDefaultRidge = 1e-6;

// Relative residual tolerance the solver must meet: ||A phi - X'Qy|| /
// max(1, ||X'Qy||) <= kSolveResidualTol after every solve.
inline constexpr double kSolveResidualTol = 1e-8;

struct DesignMatrix {
  Eigen::MatrixXd X;  // n x p (p = m, or m+1 with the bias column appended)
  Eigen::VectorXd y;  // n
};

// Assemble a design matrix from a window of samples, optionally appending a
// constant bias column.
DesignMatrix build_design(std::span<const Sample> window, bool add_bias);

enum class WeightNormalization { probability, raw };

struct SampleWeights {
  Eigen::VectorXd q;
  WeightNormalization normalization = WeightNormalization::raw;
};

// q_i >= 0 and finite; probability-normalized weights must sum to 1 (1e-9).
void validate_weights(const SampleWeights& weights);

SampleWeights uniform_weights(Eigen::Index n);

// Weighted-linear-regression coefficients phi together with the cached
// factorization of the gram matrix A = X'QX + lambda I, kept for exact
// hypergradients. Immutable after construction.
class ProxySolution {
public:
  const Eigen::VectorXd& phi() const { return phi_; }
  double ridge_lambda() const { return ridge_lambda_; }
  const Eigen::MatrixXd& gram() const { return gram_; }

  // Solves A v = rhs against the cached factorization.
  Eigen::VectorXd solve_gram(const Eigen::VectorXd& rhs) const;

private:
  friend ProxySolution solve_wls(const DesignMatrix&, const SampleWeights&, double);

  Eigen::VectorXd phi_;
  Eigen::MatrixXd gram_;
  Eigen::LDLT<Eigen::MatrixXd> factor_;
  double ridge_lambda_ = 0.0;
};

// Closed-form minimizer of 1/2 sum_i q_i (x_i.phi - y_i)^2 + lambda/2 ||phi||^2:
//   phi = (X'QX + lambda I)^-1 X'Q y.
// Throws Error("singular normal equations ...") naming the rank deficiency
// when lambda = 0 and X'QX is singular.
ProxySolution solve_wls(const DesignMatrix& data, const SampleWeights& weights,
                        double ridge_lambda);

// 1/2 sum_i q_i (x_i.phi - y_i)^2 (no ridge term).
double wls_loss(const DesignMatrix& data, const SampleWeights& weights,
                const Eigen::VectorXd& phi);

// Exact dL/dq for an upper-level loss L with gradient `upper_grad_phi` at the
// solution: implicit differentiation through the closed form,
//   dL/dq_i = (x_i . A^-1 g) (y_i - x_i . phi).
// Throws Error("stale factorization ...") if (data, weights) no longer match
// the gram matrix cached in `solution`.
Eigen::VectorXd hypergradient_q(const DesignMatrix& data, const SampleWeights& weights,
                                const ProxySolution& solution,
                                const Eigen::VectorXd& upper_grad_phi);

}  // namespace dda
