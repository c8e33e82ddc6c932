#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "readability/tensor.hpp"

namespace readability {

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;  // d(loss)/d(pred)
};

/// mean((pred - target)^2) and its gradient 2 (pred - target) / N.
LossResult mse_loss(std::span<const double> pred, std::span<const double> target);

/// Linear warmup from 0 to peak_lr over the first ceil(fraction * total)
/// steps, constant afterwards.
double warmup_lr(std::int64_t step, std::int64_t total_steps, double peak_lr, double fraction);

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct AdamWState {
  std::vector<Mat> m;
  std::vector<Mat> v;
  std::int64_t t = 0;
};

/// Adam with decoupled weight decay:
///   p <- p - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p)
class AdamW {
 public:
  explicit AdamW(AdamWOptions options = {}) : options_(options) {}

  /// Moment buffers are created on the first call; later calls must pass
  /// tensors of the same shapes in the same order.
  void step(std::span<Mat* const> params, std::span<const Mat* const> grads, double lr);

  const AdamWState& state() const { return state_; }
  const AdamWOptions& options() const { return options_; }

 private:
  AdamWOptions options_;
  AdamWState state_;
};

struct RmsPropOptions {
  double alpha = 0.99;
  double eps = 1e-8;
};

struct RmsPropState {
  std::vector<Mat> square_avg;
  std::int64_t t = 0;
};

/// v <- alpha v + (1 - alpha) g^2;  p <- p - lr g / (sqrt(v) + eps)
class RmsProp {
 public:
  explicit RmsProp(RmsPropOptions options = {}) : options_(options) {}

  void step(std::span<Mat* const> params, std::span<const Mat* const> grads, double lr);

  const RmsPropState& state() const { return state_; }

 private:
  RmsPropOptions options_;
  RmsPropState state_;
};

/// Pointers to every tensor of a parameter struct, in its visiting order.
template <typename Params>
std::vector<Mat*> tensor_pointers(Params& params) {
  std::vector<Mat*> out;
  params.for_each_tensor([&](const std::string&, Mat& m) { out.push_back(&m); });
  return out;
}

template <typename Params>
std::vector<const Mat*> tensor_pointers(const Params& params) {
  std::vector<const Mat*> out;
  params.for_each_tensor([&](const std::string&, const Mat& m) { out.push_back(&m); });
  return out;
}

enum class StopDecision { Continue, Stop };

/// Bookkeeping of early stopping. Improvement means strictly below the best
/// RMSE seen so far; stopping needs `patience` non-improving evaluations in a
/// row and more than `grace` updates done.
struct EarlyStopState {
  int patience = 5;
  std::int64_t grace = 300;
  double best_rmse = 0.0;
  bool has_best = false;
  int evals_since_best = 0;
  std::int64_t updates_done = 0;
  int evaluations = 0;
};

/// Records one evaluation; `improved` is set when it became the new best.
StopDecision early_stop_update(EarlyStopState& state, double rmse, std::int64_t updates_done, bool& improved);

/// Early stopping that also keeps a snapshot of the best checkpoint.
template <typename Checkpoint>
class EarlyStopping {
 public:
  EarlyStopping(int patience, std::int64_t grace) {
    state_.patience = patience;
    state_.grace = grace;
  }

  StopDecision update(double rmse, std::int64_t updates_done, const Checkpoint& current) {
    bool improved = false;
    const auto decision = early_stop_update(state_, rmse, updates_done, improved);
    if (improved) best_ = current;
    return decision;
  }

  const EarlyStopState& state() const { return state_; }
  double best_rmse() const { return state_.best_rmse; }
  bool has_best() const { return state_.has_best; }
  const Checkpoint& best_checkpoint() const { return best_; }

 private:
  EarlyStopState state_;
  Checkpoint best_{};
};

}  // namespace readability
