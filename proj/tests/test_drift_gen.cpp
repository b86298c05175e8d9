#include <doctest.h>

#include <cmath>

#include "dda/drift_gen.hpp"
#include "dda/error.hpp"
#include "dda/wls.hpp"

using namespace dda;

namespace {

// Plain OLS fit over a sample range, used to recover the oracle concept.
Eigen::VectorXd ols_fit(std::span<const Sample> window) {
  const DesignMatrix d = build_design(window, /*add_bias=*/false);
  SampleWeights ones;
  ones.q = Eigen::VectorXd::Ones(d.X.rows());
  return solve_wls(d, ones, 0.0).phi();
}

}  // namespace

TEST_SUITE("drift_gen") {

TEST_CASE("zero rotation, zero noise: labels follow W(0) exactly") {
  GradualDriftSpec spec;
  spec.feature_dim = 4;
  spec.total_length = 120;
  spec.rotation_rate = 0.0;
  spec.noise_std = 0.0;
  spec.seed = 11;
  const GradualStream gen = generate_gradual(spec);

  const Eigen::VectorXd w0 = gradual_weight_at(spec, 0);
  for (const Sample& s : gen.stream->samples())
    CHECK(s.label == s.features.dot(w0));

  const Eigen::VectorXd fit = ols_fit(std::span(gen.stream->samples()).subspan(20, 60));
  CHECK((fit - w0).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("rotation law: angle grows linearly with the lag") {
  GradualDriftSpec spec;
  spec.feature_dim = 6;
  spec.rotation_rate = 0.013;
  for (Tick t : {0, 17, 400}) {
    for (Tick delta : {1, 25, 250}) {
      const Eigen::VectorXd a = gradual_weight_at(spec, t);
      const Eigen::VectorXd b = gradual_weight_at(spec, t + delta);
      const double angle = std::atan2(b[1], b[0]) - std::atan2(a[1], a[0]);
      const double expected = spec.rotation_rate * static_cast<double>(delta);
      const double wrapped = std::remainder(angle - expected, 2.0 * M_PI);
      CHECK(std::abs(wrapped) < 1e-12);
      CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("gradual generator is deterministic") {
  GradualDriftSpec spec;
  spec.feature_dim = 5;
  spec.total_length = 200;
  spec.rotation_rate = 0.01;
  spec.noise_std = 0.3;
  spec.seed = 99;
  const GradualStream a = generate_gradual(spec);
  const GradualStream b = generate_gradual(spec);
  REQUIRE(a.stream->size() == b.stream->size());
  for (std::size_t i = 0; i < a.stream->size(); ++i) {
    CHECK(a.stream->samples()[i].label == b.stream->samples()[i].label);
    CHECK((a.stream->samples()[i].features - b.stream->samples()[i].features)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("rotation needs at least two feature dimensions") {
  GradualDriftSpec spec;
  spec.feature_dim = 1;
  spec.rotation_rate = 0.1;
  CHECK_THROWS_WITH_AS(generate_gradual(spec), doctest::Contains("rotation undefined"), Error);
  spec.rotation_rate = 0.0;
  CHECK_NOTHROW(generate_gradual(spec));
}

TEST_CASE("abrupt segments carry independent unit-norm concepts") {
  AbruptDriftSpec spec;
  spec.feature_dim = 7;
  spec.segment_lengths = {90, 60, 120};
  spec.noise_std = 0.0;
  spec.seed = 3;
  const AbruptStream gen = generate_abrupt(spec);

  REQUIRE(gen.segment_weights.size() == 3);
  for (const auto& w : gen.segment_weights)
    CHECK(std::abs(w.squaredNorm() - 1.0) <= 1e-12);

  // Noiseless per-segment fits recover each W.
  Tick start = 0;
  for (std::size_t seg = 0; seg < spec.segment_lengths.size(); ++seg) {
    const auto window = std::span(gen.stream->samples())
                            .subspan(static_cast<std::size_t>(start),
                                     static_cast<std::size_t>(spec.segment_lengths[seg]));
    const Eigen::VectorXd fit = ols_fit(window);
    CHECK((fit - gen.segment_weights[seg]).cwiseAbs().maxCoeff() < 1e-8);
    start += spec.segment_lengths[seg];
  }

  CHECK(&gen.weight_at(0) == &gen.segment_weights[0]);
  CHECK(&gen.weight_at(89) == &gen.segment_weights[0]);
  CHECK(&gen.weight_at(90) == &gen.segment_weights[1]);
  CHECK(&gen.weight_at(269) == &gen.segment_weights[2]);
}

TEST_CASE("single abrupt segment behaves like a static concept") {
  AbruptDriftSpec spec;
  spec.feature_dim = 4;
  spec.segment_lengths = {150};
  spec.noise_std = 0.0;
  spec.seed = 21;
  const AbruptStream gen = generate_abrupt(spec);
  const Eigen::VectorXd fit = ols_fit(gen.stream->samples());
  CHECK((fit - gen.segment_weights[0]).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("abrupt spec validation") {
  AbruptDriftSpec spec;
  spec.segment_lengths = {};
  CHECK_THROWS_WITH_AS(generate_abrupt(spec), doctest::Contains("no segments"), Error);
}

}  // TEST_SUITE
