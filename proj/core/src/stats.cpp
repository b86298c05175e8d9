#include "dda/stats.hpp"

#include <cmath>
#include <string>

#include "dda/error.hpp"

namespace dda {

double kl_normal(double mu1, double sigma1, double mu2, double sigma2) {
  if (!(sigma1 > 0.0) || !std::isfinite(sigma1) || !(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw Error("kl_normal: standard deviations must be positive, got sigma1=" +
                std::to_string(sigma1) + " sigma2=" + std::to_string(sigma2));
  const double var1 = sigma1 * sigma1;
  const double var2 = sigma2 * sigma2;
  const double dmu = mu1 - mu2;
  return std::log(sigma2 / sigma1) + (var1 + dmu * dmu) / (2.0 * var2) - 0.5;
}

NormalFit fit_normal(std::span<const double> values, double var_floor) {
  if (values.empty()) throw Error("fit_normal: empty sample");
  if (!(var_floor >= 0.0)) throw Error("fit_normal: var_floor must be >= 0");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;
  if (var < var_floor) var = var_floor;
  return {mean, std::sqrt(var)};
}

}  // namespace dda
