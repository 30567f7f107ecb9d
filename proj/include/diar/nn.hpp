// SPDX-License-Identifier: Apache-2.0
//
// From-scratch neural network engine: dense, LSTM and convolutional
// classifiers with exact backpropagation, sigmoid/softmax cross-entropy,
// Adam, finite-difference gradient checks and a binary checkpoint format.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace diar::nn {

/// Row-major dense array.
struct Tensor {
  std::vector<std::size_t> dims;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  std::size_t size() const { return data.size(); }
  std::size_t rows() const { return dims.empty() ? 0 : dims.front(); }
  // Product of all dims after the first.
  std::size_t row_width() const;

  bool operator==(const Tensor&) const = default;
};

enum class ModelKind { Slp, Mlp, Rnn, Cnn };

std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// One convolution block: valid convolution, ReLU, then non-overlapping
/// max-pooling (a 1x1 pool is a no-op).
struct ConvLayerSpec {
  int out_channels = 0;
  int kernel_h = 0;
  int kernel_w = 0;
  int pool_h = 1;
  int pool_w = 1;

  bool operator==(const ConvLayerSpec&) const = default;
};

struct ModelSpec {
  ModelKind kind = ModelKind::Slp;
  // Hidden ReLU widths: the whole network for slp/mlp, the dense head for cnn.
  std::vector<int> hidden;
  int lstm_layers = 0;
  int lstm_cells = 0;
  int steps = 0;
  int step_width = 0;
  std::vector<ConvLayerSpec> conv;
  int n_outputs = 1;  // 1: sigmoid, 4: softmax
  int input_width = 0;                // slp, mlp, rnn
  std::array<int, 3> input_shape{};   // cnn: channels, height, width
  double dropout = 0.0;

  static ModelSpec slp(int input_width, int hidden, int n_outputs = 1);
  static ModelSpec mlp(int input_width, std::vector<int> hidden, int n_outputs = 1);
  /// step_width = input_width / steps; the residue is ignored.
  static ModelSpec rnn(int input_width, int steps, int layers, int cells, int n_outputs = 1);
  static ModelSpec cnn(std::array<int, 3> input_shape, std::vector<ConvLayerSpec> conv,
                       std::vector<int> head, int n_outputs = 1);

  /// Values per input row.
  std::size_t input_size() const;
  /// Throws Error(InvalidArgument) on an inconsistent spec.
  void validate() const;

  /// Line-oriented key=value form used inside checkpoints.
  std::string serialize() const;
  static ModelSpec deserialize(std::string_view text);

  bool operator==(const ModelSpec&) const = default;
};

struct NamedTensor {
  std::string name;
  Tensor value;

  bool operator==(const NamedTensor&) const = default;
};

/// Ordered named tensors. Layer naming: dense{k}.W/b, lstm{k}.Wx/Wh/b
/// (gate column blocks ordered input, forget, output, candidate),
/// conv{k}.K (out, in, kh, kw) / conv{k}.b, out.W/out.b.
struct ParamSet {
  std::vector<NamedTensor> entries;

  std::size_t index_of(std::string_view name) const;
  const Tensor& at(std::string_view name) const { return entries[index_of(name)].value; }
  Tensor& at(std::string_view name) { return entries[index_of(name)].value; }
  std::size_t parameter_count() const;
  ParamSet zeros_like() const;
  bool same_shape(const ParamSet& other) const;

  bool operator==(const ParamSet&) const = default;
};

/// Glorot-uniform weights, zero biases except LSTM forget gates (1.0).
ParamSet init_params(const ModelSpec& spec, std::uint64_t seed);

/// Throws unless `params` has exactly the tensors `spec` requires.
void check_params(const ModelSpec& spec, const ParamSet& params);

/// Training-time options for a loss evaluation.
struct LossOptions {
  // Inverted dropout masks are drawn from this seed when spec.dropout > 0.
  std::optional<std::uint64_t> dropout_seed;
};

/// Logits (batch x n_outputs). No output activation is applied.
Tensor forward(const ModelSpec& spec, const ParamSet& params, const Tensor& batch);

struct LossAndGrad {
  double loss = 0.0;  // mean over the batch
  ParamSet grads;
  Tensor logits;
};

/// Mean sigmoid (n_outputs = 1) or softmax (n_outputs = 4) cross-entropy and
/// its exact gradient.
LossAndGrad loss_and_grad(const ModelSpec& spec, const ParamSet& params, const Tensor& batch,
                          std::span<const int> labels, const LossOptions& options = {});

/// Numerically stable per-example losses.
double sigmoid_cross_entropy(double logit, int label);
double softmax_cross_entropy(std::span<const double> logits, int label);

double sigmoid(double x);
std::vector<double> softmax(std::span<const double> logits);

/// Binary: 1 iff logit > 0. Four-class: argmax, lowest index on ties.
std::vector<int> predict_classes(const Tensor& logits);

struct AdamState {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  static AdamState fresh(const ParamSet& params, double learning_rate = 0.001);
};

/// One bias-corrected Adam update, in place.
void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t checked = 0;
  bool passed = false;
};

/// Compares analytic gradients with central differences (h = 1e-5) over
/// every parameter on a random batch. Relative error is
/// |a - n| / max(|a|, |n|, 1e-6).
GradCheckReport grad_check(const ModelSpec& spec, std::uint64_t seed, double tolerance,
                           std::size_t batch_rows = 3);

/// Extra key=value metadata stored alongside a model (preprocessing
/// settings, training provenance).
using Metadata = std::map<std::string, std::string>;

struct Checkpoint {
  ModelSpec spec;
  ParamSet params;
  Metadata metadata;

  bool operator==(const Checkpoint&) const = default;
};

/// "DKNN" v1: spec and metadata as text, then float64 tensors.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace diar::nn
