#include "readability/mlp.hpp"

#include "readability/error.hpp"

namespace readability {

MlpWeights MlpWeights::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  const auto in = static_cast<Eigen::Index>(input_dim);
  const auto h = static_cast<Eigen::Index>(hidden_dim);
  return {Mat::Zero(in, h), Mat::Zero(1, h), Mat::Zero(h, 1), Mat::Zero(1, 1)};
}

MlpWeights MlpWeights::init(std::size_t input_dim, std::size_t hidden_dim, Rng& rng, double init_std) {
  if (input_dim == 0 || hidden_dim == 0) throw ConfigError("MLP dimensions must be positive");
  auto w = zeros(input_dim, hidden_dim);
  for (Eigen::Index i = 0; i < w.w1.size(); ++i) w.w1.data()[i] = init_std * rng.normal();
  for (Eigen::Index i = 0; i < w.w2.size(); ++i) w.w2.data()[i] = init_std * rng.normal();
  return w;
}

Eigen::VectorXd mlp_forward(const Mat& x, const MlpWeights& w, MlpTrace* trace) {
  if (x.cols() != w.w1.rows()) {
    throw Error("MLP expects input dimension " + std::to_string(w.w1.rows()) + ", got " + std::to_string(x.cols()));
  }
  Mat pre = x * w.w1;
  pre.rowwise() += w.b1.row(0);
  Mat hidden = pre.cwiseMax(0.0);
  Eigen::VectorXd scores = (hidden * w.w2).col(0).array() + w.b2(0, 0);
  if (trace) {
    trace->input = x;
    trace->pre = std::move(pre);
    trace->hidden = std::move(hidden);
  }
  return scores;
}

double mlp_forward(std::span<const double> x, const MlpWeights& w) {
  const Mat row = Eigen::Map<const Mat>(x.data(), 1, static_cast<Eigen::Index>(x.size()));
  return mlp_forward(row, w)(0);
}

Mat mlp_backward(const MlpTrace& trace, const MlpWeights& w, const Eigen::VectorXd& d_scores, MlpWeights& grads) {
  if (d_scores.size() != trace.hidden.rows()) throw Error("mlp_backward: gradient count mismatch");
  grads.w2 += trace.hidden.transpose() * d_scores;
  grads.b2(0, 0) += d_scores.sum();
  Mat d_pre = d_scores * w.w2.transpose();
  d_pre = (trace.pre.array() > 0.0).select(d_pre, 0.0);
  grads.w1 += trace.input.transpose() * d_pre;
  grads.b1.row(0) += d_pre.colwise().sum();
  return d_pre * w.w1.transpose();
}

}  // namespace readability
