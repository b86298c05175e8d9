#include "dda/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "dda/csv.hpp"
#include "dda/error.hpp"

namespace dda {

namespace {

void check_pair(std::span<const double> y, std::span<const double> yhat) {
  if (y.empty()) throw Error("metric on empty input");
  if (y.size() != yhat.size())
    throw Error("metric length mismatch: " + std::to_string(y.size()) + " vs " +
                std::to_string(yhat.size()));
}

double sum_abs(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace

double mae(std::span<const double> y, std::span<const double> yhat) {
  check_pair(y, yhat);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - yhat[i]);
  return s / static_cast<double>(y.size());
}

double mse(std::span<const double> y, std::span<const double> yhat) {
  check_pair(y, yhat);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - yhat[i]) * (y[i] - yhat[i]);
  return s / static_cast<double>(y.size());
}

double rmse(std::span<const double> y, std::span<const double> yhat) {
  return std::sqrt(mse(y, yhat));
}

double nmae(std::span<const double> y, std::span<const double> yhat) {
  check_pair(y, yhat);
  const double denom = sum_abs(y);
  if (denom == 0.0) throw Error("nmae: zero normalizer (sum |y| = 0)");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - yhat[i]);
  return s / denom;
}

double nrmse(std::span<const double> y, std::span<const double> yhat) {
  check_pair(y, yhat);
  const double denom = sum_abs(y) / static_cast<double>(y.size());
  if (denom == 0.0) throw Error("nrmse: zero normalizer (mean |y| = 0)");
  return rmse(y, yhat) / denom;
}

double skill(double rmse_model, double rmse_persistence) {
  if (!(rmse_persistence > 0.0))
    throw Error("skill: persistence rmse must be > 0");
  return 1.0 - rmse_model / rmse_persistence;
}

double persistence_rmse(std::span<const double> y) {
  if (y.size() < 2) throw Error("persistence_rmse needs at least 2 points");
  double s = 0.0;
  for (std::size_t i = 1; i < y.size(); ++i) s += (y[i] - y[i - 1]) * (y[i] - y[i - 1]);
  return std::sqrt(s / static_cast<double>(y.size() - 1));
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

namespace {

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) throw Error("undefined rank correlation: constant vector");
  return cov / std::sqrt(va * vb);
}

}  // namespace

double ic(std::span<const double> yhat, std::span<const double> y) {
  check_pair(y, yhat);
  if (y.size() < 2) throw Error("ic needs at least 2 samples");
  const std::vector<double> ra = average_ranks(yhat);
  const std::vector<double> rb = average_ranks(y);
  return pearson(ra, rb);
}

double icir(std::span<const double> ic_sequence) {
  if (ic_sequence.size() < 2) throw Error("icir needs at least 2 periods");
  const auto [lo, hi] = std::minmax_element(ic_sequence.begin(), ic_sequence.end());
  if (*lo == *hi) throw Error("undefined ICIR: zero standard deviation");
  const double n = static_cast<double>(ic_sequence.size());
  double mean = 0.0;
  for (double v : ic_sequence) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : ic_sequence) var += (v - mean) * (v - mean);
  var /= (n - 1.0);
  return mean / std::sqrt(var);
}

std::string metric_report_to_json(const MetricReport& report) {
  nlohmann::json j;
  j["values"] = report.values;
  j["sample_count"] = report.sample_count;
  j["metadata"] = report.metadata;
  return j.dump(2);
}

std::string metric_csv_header(std::span<const std::string> metric_names) {
  std::ostringstream out;
  out << "scenario,method,seed";
  for (const auto& name : metric_names) out << ',' << name;
  return out.str();
}

std::string metric_csv_row(const MetricReport& report,
                           std::span<const std::string> metric_names) {
  auto meta = [&](const std::string& key) {
    auto it = report.metadata.find(key);
    return it == report.metadata.end() ? std::string() : it->second;
  };
  std::ostringstream out;
  out << meta("scenario") << ',' << meta("method") << ',' << meta("seed");
  for (const auto& name : metric_names) {
    out << ',';
    auto it = report.values.find(name);
    if (it != report.values.end()) out << format_double(it->second);
  }
  return out.str();
}

}  // namespace dda
