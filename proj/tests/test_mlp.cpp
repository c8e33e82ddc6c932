#include <gtest/gtest.h>

#include <vector>

#include "gradcheck.hpp"
#include "readability/error.hpp"
#include "readability/mlp.hpp"
#include "readability/optim.hpp"
#include "readability/rng.hpp"

namespace readability {
namespace {

MlpWeights tiny(double w1, double b1, double w2, double b2) {
  auto w = MlpWeights::zeros(1, 1);
  w.w1(0, 0) = w1;
  w.b1(0, 0) = b1;
  w.w2(0, 0) = w2;
  w.b2(0, 0) = b2;
  return w;
}

TEST(MlpForward, ZeroWeightsGiveOutputBias) {
  auto w = MlpWeights::zeros(5, 7);
  w.b2(0, 0) = 3.2;
  const std::vector<double> x{1, -2, 3, 4, 5};
  EXPECT_EQ(mlp_forward(x, w), 3.2);
}

TEST(MlpForward, HandComputationWithReluClamp) {
  const auto w = tiny(1.0, 0.0, 2.0, 1.0);
  EXPECT_EQ(mlp_forward(std::vector<double>{3.0}, w), 7.0);
  EXPECT_EQ(mlp_forward(std::vector<double>{-3.0}, w), 1.0);
}

TEST(MlpForward, BatchMatchesRows) {
  Rng rng(1);
  const auto w = MlpWeights::init(4, 6, rng, 0.5);
  Mat x(3, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const Eigen::VectorXd batch = mlp_forward(x, w);
  for (Eigen::Index r = 0; r < 3; ++r) {
    const std::vector<double> row(x.row(r).data(), x.row(r).data() + 4);
    EXPECT_DOUBLE_EQ(batch(r), mlp_forward(row, w));
  }
}

TEST(MlpForward, DimensionMismatchRejected) {
  const auto w = MlpWeights::zeros(3, 2);
  EXPECT_THROW(mlp_forward(std::vector<double>{1.0, 2.0}, w), Error);
  EXPECT_THROW(mlp_forward(Mat::Zero(2, 4), w), Error);
}

TEST(MlpInit, SeededNormalWeightsZeroBiases) {
  Rng a(2), b(2);
  const auto wa = MlpWeights::init(40, 128, a);
  const auto wb = MlpWeights::init(40, 128, b);
  EXPECT_EQ(wa.w1, wb.w1);
  EXPECT_TRUE((wa.b1.array() == 0.0).all());
  EXPECT_EQ(wa.b2(0, 0), 0.0);
  const double std = std::sqrt(wa.w1.squaredNorm() / static_cast<double>(wa.w1.size()));
  EXPECT_NEAR(std, 0.02, 0.002);
}

TEST(MlpBackward, MatchesCentralDifferences) {
  Rng rng(3);
  for (int instance = 0; instance < 20; ++instance) {
    const auto in = 2 + static_cast<std::size_t>(rng.below(6));
    const auto hidden = 2 + static_cast<std::size_t>(rng.below(9));
    auto w = MlpWeights::init(in, hidden, rng, 0.7);
    w.b1.setRandom();
    w.b2.setRandom();
    const auto rows = 1 + static_cast<Eigen::Index>(rng.below(6));
    Mat x(rows, static_cast<Eigen::Index>(in));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    std::vector<double> y(static_cast<std::size_t>(rows));
    for (auto& v : y) v = 1.0 + 6.0 * rng.uniform();

    auto loss = [&] {
      const Eigen::VectorXd p = mlp_forward(x, w);
      return mse_loss(std::span<const double>(p.data(), y.size()), y).loss;
    };
    MlpTrace trace;
    const Eigen::VectorXd p = mlp_forward(x, w, &trace);
    const auto l = mse_loss(std::span<const double>(p.data(), y.size()), y);
    auto grads = MlpWeights::zeros(in, hidden);
    const Mat dx = mlp_backward(trace, w, Eigen::Map<const Eigen::VectorXd>(l.grad.data(), rows), grads);
    for (const auto& e : testing::gradient_errors(w, grads, loss)) EXPECT_LT(e.relative_error, 1e-4) << e.name;

    // Input gradient through the same difference quotient.
    Mat numeric(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double saved = x.data()[i];
      x.data()[i] = saved + 1e-5;
      const double up = loss();
      x.data()[i] = saved - 1e-5;
      const double down = loss();
      x.data()[i] = saved;
      numeric.data()[i] = (up - down) / 2e-5;
    }
    const double scale = std::max(numeric.norm(), dx.norm());
    if (scale > 1e-10) EXPECT_LT((numeric - dx).norm() / scale, 1e-4);
  }
}

TEST(MlpBackward, ReluDerivativeAtZeroIsZero) {
  const auto w = tiny(1.0, 0.0, 2.0, 0.0);
  MlpTrace trace;
  mlp_forward(Mat::Zero(1, 1), w, &trace);
  auto grads = MlpWeights::zeros(1, 1);
  mlp_backward(trace, w, Eigen::VectorXd::Ones(1), grads);
  EXPECT_EQ(grads.w1(0, 0), 0.0);
  EXPECT_EQ(grads.b1(0, 0), 0.0);
  EXPECT_EQ(grads.b2(0, 0), 1.0);
}

TEST(MlpForward, FiniteForFiniteInputs) {
  Rng rng(4);
  const auto w = MlpWeights::init(8, 16, rng, 1.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(8);
    for (auto& v : x) v = rng.normal() * 1e6;
    EXPECT_TRUE(std::isfinite(mlp_forward(x, w)));
  }
}

}  // namespace
}  // namespace readability
