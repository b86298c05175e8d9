#pragma once

#include <span>

namespace dda {

// Exact KL(N(mu1, sigma1^2) || N(mu2, sigma2^2)), via the cross-entropy
// expansion; reduces to (mu1 - mu2)^2 / (2 sigma^2) when sigma1 == sigma2.
// Throws on non-positive or non-finite sigma.
double kl_normal(double mu1, double sigma1, double mu2, double sigma2);

struct NormalFit {
  double mu = 0.0;
  double sigma = 1.0;
};

// Gaussian MLE (population variance) with a variance floor so that
// degenerate residual sets still yield a usable sigma.
NormalFit fit_normal(std::span<const double> values, double var_floor);

}  // namespace dda
