// SPDX-License-Identifier: Apache-2.0
// Internal: forward/backward passes over one chunk of batch rows. A Network
// keeps the activations of its last forward pass for the backward pass.
#pragma once

#include <random>
#include <vector>

#include "shapes.hpp"

namespace diar::nn {

// Hidden ReLU layers followed by the output affine layer.
class DenseStack {
 public:
  DenseStack(const ModelSpec& spec, const ParamSet& params, bool dropout_on_input);

  Mat forward(Mat input, std::mt19937_64* dropout_rng);
  // Accumulates parameter gradients; returns d(loss)/d(input) when asked.
  Mat backward(const Mat& dlogits, ParamSet& grads, bool want_input_grad);

 private:
  const ParamSet& params_;
  std::vector<std::size_t> weight_idx_, bias_idx_;
  double dropout_;
  bool dropout_on_input_;
  std::vector<Mat> inputs_;  // input to each affine layer (after dropout)
  std::vector<Mat> relu_;    // hidden ReLU outputs (before dropout)
  std::vector<Mat> masks_;   // scaled dropout masks; empty when inactive
  Mat input_mask_;
};

class LstmStack {
 public:
  LstmStack(const ModelSpec& spec, const ParamSet& params);

  // x: rows x input_width; returns the top layer's last hidden state.
  Mat forward(const ConstMatMap& x);
  void backward(const Mat& dlast, ParamSet& grads);

 private:
  struct LayerCache {
    Mat input;  // (T*B) x in, row t*B + b
    Mat gates;  // (T*B) x 4H activated [i f o g]
    Mat cell;   // (T*B) x H
    Mat hidden; // (T*B) x H
  };
  const ParamSet& params_;
  int steps_, step_width_, cells_;
  Eigen::Index batch_ = 0;
  std::vector<std::size_t> wx_idx_, wh_idx_, b_idx_;
  std::vector<LayerCache> layers_;
};

class ConvStack {
 public:
  ConvStack(const ModelSpec& spec, const ParamSet& params);

  // x: rows x (C*H*W); returns rows x flattened features.
  Mat forward(const ConstMatMap& x);
  void backward(const Mat& dfeatures, ParamSet& grads);

 private:
  struct SampleCache {
    std::vector<Mat> cols;                  // patch x (conv_h*conv_w)
    std::vector<Mat> act;                   // out_c x (conv_h*conv_w), post-ReLU
    std::vector<std::vector<int>> argmax;   // per pooled output, index into act
  };
  const ParamSet& params_;
  std::vector<ConvShape> shapes_;
  std::vector<std::size_t> k_idx_, b_idx_;
  std::vector<SampleCache> samples_;
};

class Network {
 public:
  Network(const ModelSpec& spec, const ParamSet& params);

  Mat forward(const ConstMatMap& x, std::mt19937_64* dropout_rng);
  void backward(const Mat& dlogits, ParamSet& grads);

 private:
  ModelKind kind_;
  DenseStack head_;
  std::optional<LstmStack> lstm_;
  std::optional<ConvStack> conv_;
};

}  // namespace diar::nn
