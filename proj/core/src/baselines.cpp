#include "dda/baselines.hpp"

#include <cmath>
#include <string>

#include "dda/error.hpp"

namespace dda {

SampleWeights baseline_weights(const ForgettingSpec& spec, const AdaptationTask& task) {
  const auto window = task.train_window();
  if (window.empty()) throw Error("baseline_weights: empty train window");
  const Eigen::Index n = static_cast<Eigen::Index>(window.size());

  if (spec.scheme == ForgettingScheme::rr) return uniform_weights(n);

  const Tick newest = window.back().timestamp;
  Eigen::VectorXd raw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double age = static_cast<double>(newest - window[static_cast<std::size_t>(i)].timestamp);
    if (spec.scheme == ForgettingScheme::gf_lin) {
      if (!(spec.lin_slope >= 0.0)) throw Error("lin_slope must be >= 0");
      raw[i] = 1.0 - spec.lin_slope * age;
      if (raw[i] < 0.0)
        throw Error("negative linear weight: lin_slope " + std::to_string(spec.lin_slope) +
                    " at age " + std::to_string(age));
    } else {
      if (!(spec.exp_rate >= 0.0)) throw Error("exp_rate must be >= 0");
      raw[i] = std::exp(-spec.exp_rate * age);
    }
  }

  SampleWeights w;
  w.q = raw / raw.sum();
  w.normalization = WeightNormalization::probability;
  return w;
}

}  // namespace dda
