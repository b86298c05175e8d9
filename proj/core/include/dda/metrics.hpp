#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace dda {

// Regression metrics.
double mae(std::span<const double> y, std::span<const double> yhat);
double mse(std::span<const double> y, std::span<const double> yhat);
double rmse(std::span<const double> y, std::span<const double> yhat);
// sum |y - yhat| / sum |y|; errors on a zero normalizer.
double nmae(std::span<const double> y, std::span<const double> yhat);
// rmse / mean(|y|); errors on a zero normalizer.
double nrmse(std::span<const double> y, std::span<const double> yhat);

// 1 - rmse_model / rmse_persistence.
double skill(double rmse_model, double rmse_persistence);
// RMSE of the lag-1 persistence forecast yhat_t = y_{t-1} over one
// contiguous series (needs >= 2 points).
double persistence_rmse(std::span<const double> y);

// Ascending ranks, ties resolved by average rank.
std::vector<double> average_ranks(std::span<const double> values);
// Rank correlation: Pearson correlation of the two rank vectors.
double ic(std::span<const double> yhat, std::span<const double> y);
// mean / sample standard deviation (N-1) of a per-period IC sequence.
double icir(std::span<const double> ic_sequence);

struct MetricReport {
  std::map<std::string, double> values;
  std::int64_t sample_count = 0;
  std::map<std::string, std::string> metadata;  // scenario / method / seed tags
};

std::string metric_report_to_json(const MetricReport& report);

// Flat CSV row per (scenario, method, seed): metric columns in the given
// order; missing metrics are left empty.
std::string metric_csv_header(std::span<const std::string> metric_names);
std::string metric_csv_row(const MetricReport& report,
                           std::span<const std::string> metric_names);

}  // namespace dda
