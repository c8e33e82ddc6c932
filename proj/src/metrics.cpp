#include "readability/metrics.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "readability/error.hpp"

namespace readability {
namespace {

void check_lengths(std::span<const double> truth, std::span<const double> pred) {
  if (truth.size() != pred.size()) {
    throw Error("length mismatch: " + std::to_string(truth.size()) + " labels vs " + std::to_string(pred.size()) +
                " predictions");
  }
  if (truth.empty()) throw Error("cannot score an empty set");
}

}  // namespace

double rmse(std::span<const double> truth, std::span<const double> pred) {
  check_lengths(truth, pred);
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = pred[i] - truth[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(truth.size()));
}

LinearMapping mapped_rmse(std::span<const double> truth, std::span<const double> pred) {
  check_lengths(truth, pred);
  if (truth.size() < 2) throw Error("mapped RMSE needs at least 2 samples");
  const auto n = static_cast<double>(truth.size());
  const double mean_p = std::accumulate(pred.begin(), pred.end(), 0.0) / n;
  const double mean_t = std::accumulate(truth.begin(), truth.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    sxx += (pred[i] - mean_p) * (pred[i] - mean_p);
    sxy += (pred[i] - mean_p) * (truth[i] - mean_t);
  }
  if (!(sxx > 0.0)) throw Error("mapped RMSE is undefined for constant predictions");
  LinearMapping m;
  m.a = sxy / sxx;
  m.b = mean_t - m.a * mean_p;
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = m.a * pred[i] + m.b - truth[i];
    sum += d * d;
  }
  m.mapped_rmse = std::sqrt(sum / n);
  return m;
}

double cv_average(std::span<const double> per_fold_rmse) {
  if (per_fold_rmse.empty()) throw Error("cv_average of zero folds");
  return std::accumulate(per_fold_rmse.begin(), per_fold_rmse.end(), 0.0) / static_cast<double>(per_fold_rmse.size());
}

ScoreReport score(std::span<const double> truth, std::span<const double> pred) {
  const auto mapping = mapped_rmse(truth, pred);
  return {truth.size(), rmse(truth, pred), mapping.mapped_rmse, mapping.a, mapping.b};
}

nlohmann::ordered_json to_json(const ScoreReport& report) {
  return nlohmann::ordered_json{{"n", report.n}, {"rmse", report.rmse}, {"mapped_rmse", report.mapped_rmse}, {"a", report.a}, {"b", report.b}};
}

}  // namespace readability
