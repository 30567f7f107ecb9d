// SPDX-License-Identifier: Apache-2.0
// Internal: Eigen views over Tensor storage and per-spec shape tables.
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "diar/nn.hpp"

namespace diar::nn {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;
using Arr = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using RowVecMap = Eigen::Map<RowVec>;
using ConstRowVecMap = Eigen::Map<const RowVec>;

// Plain loops: Eigen's vectorized reductions peel by buffer alignment,
// which changes the summation order between otherwise identical calls.
template <typename M>
void add_column_sums(const M& m, Tensor& out) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.data[static_cast<std::size_t>(c)] += m(r, c);
  }
}
template <typename M>
void add_row_sums(const M& m, Tensor& out) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) acc += m(r, c);
    out.data[static_cast<std::size_t>(r)] += acc;
  }
}

inline ConstMatMap as_matrix(const Tensor& t, Eigen::Index rows, Eigen::Index cols) {
  return {t.data.data(), rows, cols};
}
inline MatMap as_matrix(Tensor& t, Eigen::Index rows, Eigen::Index cols) {
  return {t.data.data(), rows, cols};
}
inline ConstRowVecMap as_row(const Tensor& t) {
  return {t.data.data(), static_cast<Eigen::Index>(t.size())};
}
inline RowVecMap as_row(Tensor& t) {
  return {t.data.data(), static_cast<Eigen::Index>(t.size())};
}

struct ConvShape {
  int in_c, in_h, in_w;
  int out_c, conv_h, conv_w;  // after valid convolution
  int out_h, out_w;           // after pooling
  int kernel_h, kernel_w, pool_h, pool_w;

  int patch() const { return in_c * kernel_h * kernel_w; }
  int out_size() const { return out_c * out_h * out_w; }
};

/// Throws Error(InvalidArgument) if a layer does not fit its input.
std::vector<ConvShape> conv_shapes(const ModelSpec& spec);

struct ParamShape {
  std::string name;
  std::vector<std::size_t> dims;
  double fan_in = 0;
  double fan_out = 0;
  bool bias = false;
};

/// The tensors a spec requires, in ParamSet order.
std::vector<ParamShape> param_layout(const ModelSpec& spec);

/// Width of the vector fed to the dense head (after LSTM or conv stack).
std::size_t head_input_width(const ModelSpec& spec);

}  // namespace diar::nn
