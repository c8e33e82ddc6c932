#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "readability/rng.hpp"
#include "readability/tensor.hpp"

namespace readability {

/// Two-layer regression head: score = relu(x W1 + b1) W2 + b2.
struct MlpWeights {
  Mat w1;  // input x hidden
  Mat b1;  // 1 x hidden
  Mat w2;  // hidden x 1
  Mat b2;  // 1 x 1

  /// Normal(0, init_std) matrices, zero biases.
  static MlpWeights init(std::size_t input_dim, std::size_t hidden_dim, Rng& rng, double init_std = 0.02);
  static MlpWeights zeros(std::size_t input_dim, std::size_t hidden_dim);

  std::size_t input_dim() const { return static_cast<std::size_t>(w1.rows()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(w1.cols()); }

  template <typename F>
  void for_each_tensor(F&& f) {
    f("mlp.b1", b1);
    f("mlp.b2", b2);
    f("mlp.w1", w1);
    f("mlp.w2", w2);
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    f("mlp.b1", b1);
    f("mlp.b2", b2);
    f("mlp.w1", w1);
    f("mlp.w2", w2);
  }
};

struct MlpTrace {
  Mat input;
  Mat pre;     // x W1 + b1
  Mat hidden;  // relu(pre)
};

/// Scores for each row of x.
Eigen::VectorXd mlp_forward(const Mat& x, const MlpWeights& w, MlpTrace* trace = nullptr);
double mlp_forward(std::span<const double> x, const MlpWeights& w);

/// Accumulates gradients given d(loss)/d(score) per row; returns d(loss)/dx.
Mat mlp_backward(const MlpTrace& trace, const MlpWeights& w, const Eigen::VectorXd& d_scores, MlpWeights& grads);

}  // namespace readability
