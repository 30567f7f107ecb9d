// SPDX-License-Identifier: Apache-2.0
#include "network.hpp"

#include "diar/error.hpp"

namespace diar::nn {
namespace {

Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - p);
  Mat mask(rows, cols);
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = u(rng) < p ? 0.0 : keep_scale;
  }
  return mask;
}

template <typename Derived>
auto sigmoid_array(const Eigen::ArrayBase<Derived>& z) {
  return 1.0 / (1.0 + (-z).exp());
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseStack

DenseStack::DenseStack(const ModelSpec& spec, const ParamSet& params, bool dropout_on_input)
    : params_(params), dropout_(spec.dropout), dropout_on_input_(dropout_on_input) {
  for (std::size_t k = 0; k < spec.hidden.size(); ++k) {
    weight_idx_.push_back(params.index_of("dense" + std::to_string(k) + ".W"));
    bias_idx_.push_back(params.index_of("dense" + std::to_string(k) + ".b"));
  }
  weight_idx_.push_back(params.index_of("out.W"));
  bias_idx_.push_back(params.index_of("out.b"));
}

Mat DenseStack::forward(Mat input, std::mt19937_64* dropout_rng) {
  const bool drop = dropout_rng != nullptr && dropout_ > 0.0;
  inputs_.clear();
  relu_.clear();
  masks_.clear();
  input_mask_.resize(0, 0);
  if (drop && dropout_on_input_) {
    input_mask_ = dropout_mask(input.rows(), input.cols(), dropout_, *dropout_rng);
    input.array() *= input_mask_.array();
  }
  inputs_.push_back(std::move(input));
  const std::size_t n_layers = weight_idx_.size();
  for (std::size_t k = 0; k < n_layers; ++k) {
    const Tensor& w = params_.entries[weight_idx_[k]].value;
    const Tensor& b = params_.entries[bias_idx_[k]].value;
    const auto in_w = static_cast<Eigen::Index>(w.dims[0]);
    const auto out_w = static_cast<Eigen::Index>(w.dims[1]);
    Mat z = inputs_.back() * as_matrix(w, in_w, out_w);
    z.rowwise() += as_row(b);
    if (k + 1 == n_layers) {
      return z;
    }
    Mat r = z.cwiseMax(0.0);
    Mat next = r;
    if (drop) {
      masks_.push_back(dropout_mask(r.rows(), r.cols(), dropout_, *dropout_rng));
      next.array() *= masks_.back().array();
    }
    relu_.push_back(std::move(r));
    inputs_.push_back(std::move(next));
  }
  throw Error(ErrorCode::InvalidArgument, "dense stack without layers");
}

Mat DenseStack::backward(const Mat& dlogits, ParamSet& grads, bool want_input_grad) {
  Mat d = dlogits;
  for (std::size_t k = weight_idx_.size(); k-- > 0;) {
    const Tensor& w = params_.entries[weight_idx_[k]].value;
    const auto in_w = static_cast<Eigen::Index>(w.dims[0]);
    const auto out_w = static_cast<Eigen::Index>(w.dims[1]);
    as_matrix(grads.entries[weight_idx_[k]].value, in_w, out_w).noalias() += inputs_[k].transpose() * d;
    add_column_sums(d, grads.entries[bias_idx_[k]].value);
    if (k == 0 && !want_input_grad) {
      return {};
    }
    Mat din = d * as_matrix(w, in_w, out_w).transpose();
    if (k > 0) {
      if (!masks_.empty()) din.array() *= masks_[k - 1].array();
      din.array() *= (relu_[k - 1].array() > 0.0).cast<double>();
    } else if (input_mask_.size() > 0) {
      din.array() *= input_mask_.array();
    }
    d = std::move(din);
  }
  return d;
}

// ---------------------------------------------------------------------------
// LstmStack

LstmStack::LstmStack(const ModelSpec& spec, const ParamSet& params)
    : params_(params), steps_(spec.steps), step_width_(spec.step_width), cells_(spec.lstm_cells) {
  for (int l = 0; l < spec.lstm_layers; ++l) {
    const std::string p = "lstm" + std::to_string(l);
    wx_idx_.push_back(params.index_of(p + ".Wx"));
    wh_idx_.push_back(params.index_of(p + ".Wh"));
    b_idx_.push_back(params.index_of(p + ".b"));
  }
}

Mat LstmStack::forward(const ConstMatMap& x) {
  const Eigen::Index B = x.rows();
  const Eigen::Index T = steps_;
  const Eigen::Index H = cells_;
  batch_ = B;
  layers_.assign(wx_idx_.size(), {});

  // Row t*B + b holds step t of example b.
  Mat input(T * B, step_width_);
  for (Eigen::Index t = 0; t < T; ++t) {
    input.middleRows(t * B, B) = x.middleCols(t * step_width_, step_width_);
  }

  for (std::size_t l = 0; l < wx_idx_.size(); ++l) {
    auto& cache = layers_[l];
    const Tensor& wx_t = params_.entries[wx_idx_[l]].value;
    const auto wx = as_matrix(wx_t, static_cast<Eigen::Index>(wx_t.dims[0]), 4 * H);
    const auto wh = as_matrix(params_.entries[wh_idx_[l]].value, H, 4 * H);
    const auto bias = as_row(params_.entries[b_idx_[l]].value);

    cache.input = std::move(input);
    cache.gates.noalias() = cache.input * wx;
    cache.gates.rowwise() += bias;
    cache.cell.resize(T * B, H);
    cache.hidden.resize(T * B, H);

    for (Eigen::Index t = 0; t < T; ++t) {
      auto z = cache.gates.middleRows(t * B, B);
      if (t > 0) {
        z.noalias() += cache.hidden.middleRows((t - 1) * B, B) * wh;
      }
      z.leftCols(3 * H) = sigmoid_array(z.leftCols(3 * H).array()).matrix();
      z.rightCols(H) = z.rightCols(H).array().tanh().matrix();
      const auto i = z.leftCols(H).array();
      const auto f = z.middleCols(H, H).array();
      const auto o = z.middleCols(2 * H, H).array();
      const auto g = z.rightCols(H).array();
      auto c = cache.cell.middleRows(t * B, B).array();
      if (t > 0) {
        c = f * cache.cell.middleRows((t - 1) * B, B).array() + i * g;
      } else {
        c = i * g;
      }
      cache.hidden.middleRows(t * B, B).array() = o * c.tanh();
    }
    input = cache.hidden;
  }
  return layers_.back().hidden.bottomRows(B);
}

void LstmStack::backward(const Mat& dlast, ParamSet& grads) {
  const Eigen::Index B = batch_;
  const Eigen::Index T = steps_;
  const Eigen::Index H = cells_;

  Mat dhidden = Mat::Zero(T * B, H);
  dhidden.bottomRows(B) = dlast;

  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& cache = layers_[l];
    const Tensor& wx_t = params_.entries[wx_idx_[l]].value;
    const auto in_w = static_cast<Eigen::Index>(wx_t.dims[0]);
    const auto wx = as_matrix(wx_t, in_w, 4 * H);
    const auto wh = as_matrix(params_.entries[wh_idx_[l]].value, H, 4 * H);

    Mat dz(T * B, 4 * H);
    Mat dh_next = Mat::Zero(B, H);
    Mat dc_next = Mat::Zero(B, H);
    for (Eigen::Index t = T; t-- > 0;) {
      const auto gates = cache.gates.middleRows(t * B, B);
      const auto i = gates.leftCols(H).array();
      const auto f = gates.middleCols(H, H).array();
      const auto o = gates.middleCols(2 * H, H).array();
      const auto g = gates.rightCols(H).array();
      const Arr tc = cache.cell.middleRows(t * B, B).array().tanh();
      const Arr dh = dhidden.middleRows(t * B, B).array() + dh_next.array();
      const Arr dc = dh * o * (1.0 - tc.square()) + dc_next.array();

      auto dzt = dz.middleRows(t * B, B);
      dzt.leftCols(H).array() = dc * g * i * (1.0 - i);
      if (t > 0) {
        dzt.middleCols(H, H).array() = dc * cache.cell.middleRows((t - 1) * B, B).array() * f * (1.0 - f);
      } else {
        dzt.middleCols(H, H).setZero();
      }
      dzt.middleCols(2 * H, H).array() = dh * tc * o * (1.0 - o);
      dzt.rightCols(H).array() = dc * i * (1.0 - g.square());

      dc_next = (dc * f).matrix();
      dh_next.noalias() = dzt * wh.transpose();
    }

    as_matrix(grads.entries[wx_idx_[l]].value, in_w, 4 * H).noalias() += cache.input.transpose() * dz;
    add_column_sums(dz, grads.entries[b_idx_[l]].value);
    if (T > 1) {
      as_matrix(grads.entries[wh_idx_[l]].value, H, 4 * H).noalias() +=
          cache.hidden.topRows((T - 1) * B).transpose() * dz.bottomRows((T - 1) * B);
    }
    if (l > 0) {
      dhidden.noalias() = dz * wx.transpose();
    }
  }
}

// ---------------------------------------------------------------------------
// ConvStack

ConvStack::ConvStack(const ModelSpec& spec, const ParamSet& params)
    : params_(params), shapes_(conv_shapes(spec)) {
  for (std::size_t k = 0; k < shapes_.size(); ++k) {
    k_idx_.push_back(params.index_of("conv" + std::to_string(k) + ".K"));
    b_idx_.push_back(params.index_of("conv" + std::to_string(k) + ".b"));
  }
}

Mat ConvStack::forward(const ConstMatMap& x) {
  const Eigen::Index B = x.rows();
  const auto& last = shapes_.back();
  Mat features(B, last.out_size());
  samples_.assign(static_cast<std::size_t>(B), {});

  for (Eigen::Index b = 0; b < B; ++b) {
    auto& sc = samples_[static_cast<std::size_t>(b)];
    Mat in = x.row(b);  // 1 x (C*H*W), viewed as C x (H*W)
    for (std::size_t k = 0; k < shapes_.size(); ++k) {
      const auto& s = shapes_[k];
      const int conv_hw = s.conv_h * s.conv_w;
      Mat cols(s.patch(), conv_hw);
      for (int c = 0; c < s.in_c; ++c) {
        for (int ki = 0; ki < s.kernel_h; ++ki) {
          for (int kj = 0; kj < s.kernel_w; ++kj) {
            const int r = (c * s.kernel_h + ki) * s.kernel_w + kj;
            for (int y = 0; y < s.conv_h; ++y) {
              for (int xx = 0; xx < s.conv_w; ++xx) {
                cols(r, y * s.conv_w + xx) = in.data()[(c * s.in_h + y + ki) * s.in_w + xx + kj];
              }
            }
          }
        }
      }
      const auto kernel = as_matrix(params_.entries[k_idx_[k]].value, s.out_c, s.patch());
      const auto bias = as_row(params_.entries[b_idx_[k]].value);
      Mat act = kernel * cols;
      act.colwise() += bias.transpose();
      act = act.cwiseMax(0.0);

      Mat pooled(s.out_c, s.out_h * s.out_w);
      std::vector<int> argmax(static_cast<std::size_t>(s.out_size()));
      for (int c = 0; c < s.out_c; ++c) {
        for (int py = 0; py < s.out_h; ++py) {
          for (int px = 0; px < s.out_w; ++px) {
            int best = (py * s.pool_h) * s.conv_w + px * s.pool_w;
            for (int i = 0; i < s.pool_h; ++i) {
              for (int j = 0; j < s.pool_w; ++j) {
                const int idx = (py * s.pool_h + i) * s.conv_w + px * s.pool_w + j;
                if (act(c, idx) > act(c, best)) best = idx;
              }
            }
            pooled(c, py * s.out_w + px) = act(c, best);
            argmax[static_cast<std::size_t>((c * s.out_h + py) * s.out_w + px)] = best;
          }
        }
      }
      sc.cols.push_back(std::move(cols));
      sc.act.push_back(std::move(act));
      sc.argmax.push_back(std::move(argmax));
      in = std::move(pooled);
    }
    features.row(b) = Eigen::Map<const RowVec>(in.data(), in.size());
  }
  return features;
}

void ConvStack::backward(const Mat& dfeatures, ParamSet& grads) {
  for (Eigen::Index b = 0; b < dfeatures.rows(); ++b) {
    const auto& sc = samples_[static_cast<std::size_t>(b)];
    Mat dout = dfeatures.row(b);  // pooled gradient, flattened (c, y, x)
    for (std::size_t k = shapes_.size(); k-- > 0;) {
      const auto& s = shapes_[k];
      const int conv_hw = s.conv_h * s.conv_w;
      Mat dact = Mat::Zero(s.out_c, conv_hw);
      const auto& argmax = sc.argmax[k];
      for (int c = 0; c < s.out_c; ++c) {
        for (int p = 0; p < s.out_h * s.out_w; ++p) {
          dact(c, argmax[static_cast<std::size_t>(c * s.out_h * s.out_w + p)]) += dout.data()[c * s.out_h * s.out_w + p];
        }
      }
      dact.array() *= (sc.act[k].array() > 0.0).cast<double>();

      as_matrix(grads.entries[k_idx_[k]].value, s.out_c, s.patch()).noalias() += dact * sc.cols[k].transpose();
      add_row_sums(dact, grads.entries[b_idx_[k]].value);
      if (k == 0) break;

      const auto kernel = as_matrix(params_.entries[k_idx_[k]].value, s.out_c, s.patch());
      const Mat dcols = kernel.transpose() * dact;
      Mat din = Mat::Zero(1, s.in_c * s.in_h * s.in_w);
      for (int c = 0; c < s.in_c; ++c) {
        for (int ki = 0; ki < s.kernel_h; ++ki) {
          for (int kj = 0; kj < s.kernel_w; ++kj) {
            const int r = (c * s.kernel_h + ki) * s.kernel_w + kj;
            for (int y = 0; y < s.conv_h; ++y) {
              for (int xx = 0; xx < s.conv_w; ++xx) {
                din.data()[(c * s.in_h + y + ki) * s.in_w + xx + kj] += dcols(r, y * s.conv_w + xx);
              }
            }
          }
        }
      }
      dout = std::move(din);
    }
  }
}

// ---------------------------------------------------------------------------
// Network

Network::Network(const ModelSpec& spec, const ParamSet& params)
    : kind_(spec.kind), head_(spec, params, spec.kind == ModelKind::Rnn) {
  if (kind_ == ModelKind::Rnn) lstm_.emplace(spec, params);
  if (kind_ == ModelKind::Cnn) conv_.emplace(spec, params);
}

Mat Network::forward(const ConstMatMap& x, std::mt19937_64* dropout_rng) {
  switch (kind_) {
    case ModelKind::Rnn: return head_.forward(lstm_->forward(x), dropout_rng);
    case ModelKind::Cnn: return head_.forward(conv_->forward(x), dropout_rng);
    default: return head_.forward(Mat(x), dropout_rng);
  }
}

void Network::backward(const Mat& dlogits, ParamSet& grads) {
  const bool deep = kind_ == ModelKind::Rnn || kind_ == ModelKind::Cnn;
  Mat dhead = head_.backward(dlogits, grads, deep);
  if (kind_ == ModelKind::Rnn) lstm_->backward(dhead, grads);
  if (kind_ == ModelKind::Cnn) conv_->backward(dhead, grads);
}

}  // namespace diar::nn
