#pragma once

#include "dda/stream.hpp"
#include "dda/wls.hpp"

namespace dda {

enum class ForgettingScheme { rr, gf_lin, gf_exp };

// Model-agnostic forgetting baselines. Rates are per tick; ages are measured
// back from the newest train-window timestamp.
struct ForgettingSpec {
  ForgettingScheme scheme = ForgettingScheme::rr;
  double lin_slope = 0.0;
  double exp_rate = 0.0;
};

// rr: uniform. gf_lin: w_i = 1 - lin_slope * age_i. gf_exp:
// w_i = exp(-exp_rate * age_i). Raw weights are normalized to probabilities.
// Throws when a linear weight would go negative inside the window.
SampleWeights baseline_weights(const ForgettingSpec& spec, const AdaptationTask& task);

}  // namespace dda
