#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace readability {

/// Row-major dense matrix; all parameters (including biases, as 1 x n) use it.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::RowVectorXd;

/// (name, tensor) pairs in a fixed traversal order.
using NamedTensors = std::vector<std::pair<std::string, Mat*>>;
using ConstNamedTensors = std::vector<std::pair<std::string, const Mat*>>;

template <typename Params>
NamedTensors named_tensors(Params& params) {
  NamedTensors out;
  params.for_each_tensor([&](const std::string& name, Mat& m) { out.emplace_back(name, &m); });
  return out;
}

template <typename Params>
ConstNamedTensors named_tensors(const Params& params) {
  ConstNamedTensors out;
  params.for_each_tensor([&](const std::string& name, const Mat& m) { out.emplace_back(name, &m); });
  return out;
}

template <typename Params>
void set_zero(Params& params) {
  params.for_each_tensor([](const std::string&, Mat& m) { m.setZero(); });
}

template <typename Params>
bool all_finite(const Params& params) {
  bool ok = true;
  params.for_each_tensor([&](const std::string&, const Mat& m) { ok = ok && m.allFinite(); });
  return ok;
}

}  // namespace readability
