#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "dda/stream.hpp"

namespace dda {

// Predictable gradual drift: the concept vector W(t) rotates at a constant
// angular rate inside the (e0, e1) coordinate plane, starting at W(0) = e0.
struct GradualDriftSpec {
  int feature_dim = 10;
  Tick total_length = 2000;
  double rotation_rate = 0.0;  // radians per tick
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  Tick period_length = 20;  // carried onto the emitted stream
};

// Unpredictable abrupt drift: each segment gets an independent unit-norm W.
struct AbruptDriftSpec {
  int feature_dim = 10;
  std::vector<Tick> segment_lengths;
  double noise_std = 1.0;
  std::uint64_t seed = 0;
  Tick period_length = 20;
};

struct GradualStream {
  StreamPtr stream;
  std::vector<Eigen::VectorXd> weights;  // oracle W(t), one per tick, t = 0..T-1
};

struct AbruptStream {
  StreamPtr stream;
  std::vector<Eigen::VectorXd> segment_weights;
  std::vector<Tick> segment_starts;  // first tick of each segment

  const Eigen::VectorXd& weight_at(Tick t) const;
};

// Oracle rotation law, usable without generating a stream.
Eigen::VectorXd gradual_weight_at(const GradualDriftSpec& spec, Tick t);

// x_t ~ N(0, I), y_t = x_t . W(t) + eps, eps ~ N(0, noise_std^2).
// Deterministic given the spec (seed included). Timestamps run 0..T-1.
GradualStream generate_gradual(const GradualDriftSpec& spec);
AbruptStream generate_abrupt(const AbruptDriftSpec& spec);

// Oracle weight table: header `timestamp,w0,...`, one row per tick.
void write_weights_csv(const std::vector<Eigen::VectorXd>& weights, Tick first_tick,
                       std::ostream& out);
void write_weights_csv(const std::vector<Eigen::VectorXd>& weights, Tick first_tick,
                       const std::filesystem::path& path);

}  // namespace dda
