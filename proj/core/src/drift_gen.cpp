#include "dda/drift_gen.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "dda/csv.hpp"
#include "dda/error.hpp"

namespace dda {

const Eigen::VectorXd& AbruptStream::weight_at(Tick t) const {
  for (std::size_t i = segment_starts.size(); i-- > 0;)
    if (t >= segment_starts[i]) return segment_weights[i];
  throw Error("weight_at: tick before first segment");
}

Eigen::VectorXd gradual_weight_at(const GradualDriftSpec& spec, Tick t) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(spec.feature_dim);
  const double angle = spec.rotation_rate * static_cast<double>(t);
  if (spec.feature_dim == 1) {
    w[0] = 1.0;
  } else {
    w[0] = std::cos(angle);
    w[1] = std::sin(angle);
  }
  return w;
}

namespace {

void validate_common(int feature_dim, double noise_std) {
  if (feature_dim < 1) throw Error("feature_dim must be >= 1");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
    throw Error("noise_std must be finite and >= 0");
}

}  // namespace

GradualStream generate_gradual(const GradualDriftSpec& spec) {
  validate_common(spec.feature_dim, spec.noise_std);
  if (spec.total_length < 1) throw Error("total_length must be >= 1");
  if (!std::isfinite(spec.rotation_rate)) throw Error("rotation rate must be finite");
  if (spec.feature_dim < 2 && spec.rotation_rate != 0.0)
    throw Error("rotation undefined: feature_dim < 2 with nonzero rotation rate");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  GradualStream out;
  out.weights.reserve(static_cast<std::size_t>(spec.total_length));
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(spec.total_length));
  for (Tick t = 0; t < spec.total_length; ++t) {
    Eigen::VectorXd w = gradual_weight_at(spec, t);
    Sample s;
    s.timestamp = t;
    s.features.resize(spec.feature_dim);
    for (int j = 0; j < spec.feature_dim; ++j) s.features[j] = gauss(rng);
    s.label = s.features.dot(w) + spec.noise_std * gauss(rng);
    samples.push_back(std::move(s));
    out.weights.push_back(std::move(w));
  }
  out.stream = std::make_shared<TimeIndexedStream>(std::move(samples), spec.period_length);
  return out;
}

AbruptStream generate_abrupt(const AbruptDriftSpec& spec) {
  validate_common(spec.feature_dim, spec.noise_std);
  if (spec.segment_lengths.empty()) throw Error("no segments in abrupt drift spec");
  for (Tick len : spec.segment_lengths)
    if (len < 1) throw Error("segment lengths must be >= 1");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  AbruptStream out;
  std::vector<Sample> samples;
  Tick t = 0;
  for (Tick len : spec.segment_lengths) {
    // Independent direction per segment, ||W||_2^2 = 1.
    Eigen::VectorXd w(spec.feature_dim);
    do {
      for (int j = 0; j < spec.feature_dim; ++j) w[j] = gauss(rng);
    } while (w.norm() == 0.0);
    w.normalize();
    out.segment_starts.push_back(t);
    for (Tick i = 0; i < len; ++i, ++t) {
      Sample s;
      s.timestamp = t;
      s.features.resize(spec.feature_dim);
      for (int j = 0; j < spec.feature_dim; ++j) s.features[j] = gauss(rng);
      s.label = s.features.dot(w) + spec.noise_std * gauss(rng);
      samples.push_back(std::move(s));
    }
    out.segment_weights.push_back(std::move(w));
  }
  out.stream = std::make_shared<TimeIndexedStream>(std::move(samples), spec.period_length);
  return out;
}

void write_weights_csv(const std::vector<Eigen::VectorXd>& weights, Tick first_tick,
                       std::ostream& out) {
  if (weights.empty()) throw Error("no weights to write");
  const auto m = weights.front().size();
  out << "timestamp";
  for (Eigen::Index j = 0; j < m; ++j) out << ",w" << j;
  out << '\n';
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out << (first_tick + static_cast<Tick>(i));
    for (Eigen::Index j = 0; j < m; ++j) out << ',' << format_double(weights[i][j]);
    out << '\n';
  }
}

void write_weights_csv(const std::vector<Eigen::VectorXd>& weights, Tick first_tick,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write weights csv: " + path.string());
  write_weights_csv(weights, first_tick, out);
}

}  // namespace dda
