#include "readability/optim.hpp"

#include <cmath>
#include <string>

#include "readability/error.hpp"

namespace readability {
namespace {

void check_pairs(std::span<Mat* const> params, std::span<const Mat* const> grads, const std::vector<Mat>& buffers) {
  if (params.size() != grads.size()) throw Error("optimizer: parameter and gradient counts differ");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->rows() != grads[i]->rows() || params[i]->cols() != grads[i]->cols()) {
      throw Error("optimizer: gradient " + std::to_string(i) + " does not match its parameter's shape");
    }
  }
  if (buffers.empty()) return;
  if (buffers.size() != params.size()) throw Error("optimizer: parameter count changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (buffers[i].rows() != params[i]->rows() || buffers[i].cols() != params[i]->cols()) {
      throw Error("optimizer: parameter " + std::to_string(i) + " changed shape between steps");
    }
  }
}

std::vector<Mat> zeros_like(std::span<Mat* const> params) {
  std::vector<Mat> out;
  out.reserve(params.size());
  for (const auto* p : params) out.push_back(Mat::Zero(p->rows(), p->cols()));
  return out;
}

}  // namespace

LossResult mse_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw Error("mse_loss: " + std::to_string(pred.size()) + " predictions vs " + std::to_string(target.size()) +
                " targets");
  }
  if (pred.empty()) throw Error("mse_loss: empty input");
  const auto n = static_cast<double>(pred.size());
  LossResult r;
  r.grad.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double diff = pred[i] - target[i];
    r.loss += diff * diff;
    r.grad[i] = 2.0 * diff / n;
  }
  r.loss /= n;
  return r;
}

double warmup_lr(std::int64_t step, std::int64_t total_steps, double peak_lr, double fraction) {
  if (total_steps <= 0) throw Error("warmup_lr: total_steps must be positive");
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error("warmup_lr: fraction must lie in (0, 1)");
  if (step < 0) throw Error("warmup_lr: negative step");
  // The epsilon absorbs products like 0.3 * 100 = 30.000000000000004.
  const auto warmup_steps = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(fraction * static_cast<double>(total_steps) - 1e-9)));
  if (step >= warmup_steps) return peak_lr;
  return peak_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
}

void AdamW::step(std::span<Mat* const> params, std::span<const Mat* const> grads, double lr) {
  check_pairs(params, grads, state_.m);
  if (state_.m.empty()) {
    state_.m = zeros_like(params);
    state_.v = zeros_like(params);
  }
  ++state_.t;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state_.t));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state_.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->array();
    const auto g = grads[i]->array();
    auto m = state_.m[i].array();
    auto v = state_.v[i].array();
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.square();
    p -= lr * ((m / correction1) / ((v / correction2).sqrt() + options_.eps) + options_.weight_decay * p);
  }
}

void RmsProp::step(std::span<Mat* const> params, std::span<const Mat* const> grads, double lr) {
  check_pairs(params, grads, state_.square_avg);
  if (state_.square_avg.empty()) state_.square_avg = zeros_like(params);
  ++state_.t;
  const double a = options_.alpha;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->array();
    const auto g = grads[i]->array();
    auto v = state_.square_avg[i].array();
    v = a * v + (1.0 - a) * g.square();
    p -= lr * g / (v.sqrt() + options_.eps);
  }
}

StopDecision early_stop_update(EarlyStopState& state, double rmse, std::int64_t updates_done, bool& improved) {
  if (std::isnan(rmse)) throw Error("early stopping received a NaN RMSE");
  if (updates_done < state.updates_done) throw Error("early stopping: update counter went backwards");
  state.updates_done = updates_done;
  ++state.evaluations;
  improved = !state.has_best || rmse < state.best_rmse;
  if (improved) {
    state.best_rmse = rmse;
    state.has_best = true;
    state.evals_since_best = 0;
  } else {
    ++state.evals_since_best;
  }
  if (state.evals_since_best >= state.patience && state.updates_done > state.grace) return StopDecision::Stop;
  return StopDecision::Continue;
}

}  // namespace readability
