#pragma once

#include <cstddef>
#include <span>

#include <json.hpp>

namespace readability {

/// sqrt(mean((pred - truth)^2)). Throws on length mismatch or empty input.
double rmse(std::span<const double> truth, std::span<const double> pred);

struct LinearMapping {
  double a = 1.0;
  double b = 0.0;
  double mapped_rmse = 0.0;
};

/// First-order mapping of predictions onto the label scale: (a, b)
/// minimizes sum (a * pred + b - truth)^2, and the RMSE after mapping is
/// reported. Throws when pred is constant or fewer than 2 samples.
LinearMapping mapped_rmse(std::span<const double> truth, std::span<const double> pred);

/// Arithmetic mean of per-fold RMSEs.
double cv_average(std::span<const double> per_fold_rmse);

struct ScoreReport {
  std::size_t n = 0;
  double rmse = 0.0;
  double mapped_rmse = 0.0;
  double a = 1.0;
  double b = 0.0;
};

ScoreReport score(std::span<const double> truth, std::span<const double> pred);

/// `{n, rmse, mapped_rmse, a, b}`
nlohmann::ordered_json to_json(const ScoreReport& report);

}  // namespace readability
