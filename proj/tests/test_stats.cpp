#include <doctest.h>

#include <cmath>
#include <random>

#include "dda/error.hpp"
#include "dda/stats.hpp"

using namespace dda;

TEST_SUITE("stats") {

TEST_CASE("kl_normal golden values") {
  CHECK(kl_normal(0.0, 1.0, 0.0, 1.0) == 0.0);
  CHECK(kl_normal(1.0, 1.0, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("equal-sigma KL is exactly the scaled squared mean gap") {
  for (double sigma : {0.5, 1.0, 2.0}) {
    for (double mu1 = -3.0; mu1 <= 3.0; mu1 += 0.5) {
      for (double mu2 = -3.0; mu2 <= 3.0; mu2 += 0.5) {
        const double kl = kl_normal(mu1, sigma, mu2, sigma);
        const double expected = (mu1 - mu2) * (mu1 - mu2);
        CHECK(std::abs(kl * 2.0 * sigma * sigma - expected) <=
              1e-13 * std::max(1.0, expected));
      }
    }
  }
}

TEST_CASE("kl_normal agrees with a Monte-Carlo estimate") {
  std::mt19937_64 rng(12345);
  const struct {
    double mu1, s1, mu2, s2;
  } cases[] = {{0.0, 1.0, 1.0, 1.0}, {0.5, 0.7, -0.25, 1.5}, {-2.0, 2.0, 1.0, 0.8}};
  for (const auto& c : cases) {
    std::normal_distribution<double> q(c.mu1, c.s1);
    auto log_pdf = [](double z, double mu, double s) {
      const double d = (z - mu) / s;
      return -0.5 * std::log(2.0 * M_PI) - std::log(s) - 0.5 * d * d;
    };
    const int draws = 1000000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double z = q(rng);
      const double v = log_pdf(z, c.mu1, c.s1) - log_pdf(z, c.mu2, c.s2);
      sum += v;
      sum_sq += v * v;
    }
    const double mean = sum / draws;
    const double variance = (sum_sq / draws - mean * mean) / draws;
    const double std_err = std::sqrt(variance);
    const double analytic = kl_normal(c.mu1, c.s1, c.mu2, c.s2);
    CHECK(std::abs(mean - analytic) <= 3.0 * std_err);
  }
}

TEST_CASE("kl_normal rejects non-positive sigma") {
  CHECK_THROWS_AS(kl_normal(0.0, 0.0, 0.0, 1.0), Error);
  CHECK_THROWS_AS(kl_normal(0.0, 1.0, 0.0, -2.0), Error);
}

TEST_CASE("fit_normal computes the MLE with a variance floor") {
  const double values[] = {1.0, 3.0, 5.0, 7.0};
  const NormalFit fit = fit_normal(values, 0.0);
  CHECK(fit.mu == doctest::Approx(4.0));
  CHECK(fit.sigma == doctest::Approx(std::sqrt(5.0)));

  const double flat[] = {2.0, 2.0, 2.0};
  const NormalFit floored = fit_normal(flat, 1e-9);
  CHECK(floored.sigma == doctest::Approx(std::sqrt(1e-9)));
}

}  // TEST_SUITE
