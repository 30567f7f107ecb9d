// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "diar/error.hpp"
#include "shapes.hpp"

namespace diar::nn {

Tensor::Tensor(std::vector<std::size_t> shape)
    : dims(std::move(shape)),
      data(std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>()), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : dims(std::move(shape)), data(std::move(values)) {
  const auto n = std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  if (n != data.size()) {
    throw Error(ErrorCode::ShapeMismatch, "tensor dims do not match its data length");
  }
}

std::size_t Tensor::row_width() const {
  if (dims.empty()) return 0;
  return std::accumulate(dims.begin() + 1, dims.end(), std::size_t{1}, std::multiplies<>());
}

std::size_t ParamSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].name == name) return i;
  }
  throw Error(ErrorCode::ShapeMismatch, "parameter '" + std::string(name) + "' not found");
}

std::size_t ParamSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.value.size();
  return n;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  out.entries.reserve(entries.size());
  for (const auto& e : entries) out.entries.push_back({e.name, Tensor(e.value.dims)});
  return out;
}

bool ParamSet::same_shape(const ParamSet& other) const {
  if (entries.size() != other.entries.size()) return false;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].name != other.entries[i].name || entries[i].value.dims != other.entries[i].value.dims) {
      return false;
    }
  }
  return true;
}

std::vector<ConvShape> conv_shapes(const ModelSpec& spec) {
  std::vector<ConvShape> shapes;
  int c = spec.input_shape[0], h = spec.input_shape[1], w = spec.input_shape[2];
  for (std::size_t k = 0; k < spec.conv.size(); ++k) {
    const auto& layer = spec.conv[k];
    ConvShape s{};
    s.in_c = c;
    s.in_h = h;
    s.in_w = w;
    s.out_c = layer.out_channels;
    s.kernel_h = layer.kernel_h;
    s.kernel_w = layer.kernel_w;
    s.pool_h = layer.pool_h;
    s.pool_w = layer.pool_w;
    s.conv_h = h - layer.kernel_h + 1;
    s.conv_w = w - layer.kernel_w + 1;
    if (s.conv_h <= 0 || s.conv_w <= 0) {
      throw Error(ErrorCode::InvalidArgument, "conv layer " + std::to_string(k) + ": kernel " +
                                                  std::to_string(layer.kernel_h) + "x" + std::to_string(layer.kernel_w) +
                                                  " does not fit a " + std::to_string(h) + "x" + std::to_string(w) +
                                                  " input");
    }
    s.out_h = s.conv_h / layer.pool_h;
    s.out_w = s.conv_w / layer.pool_w;
    if (s.out_h <= 0 || s.out_w <= 0) {
      throw Error(ErrorCode::InvalidArgument, "conv layer " + std::to_string(k) + ": pool does not fit");
    }
    shapes.push_back(s);
    c = s.out_c;
    h = s.out_h;
    w = s.out_w;
  }
  return shapes;
}

std::size_t head_input_width(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::Slp:
    case ModelKind::Mlp: return static_cast<std::size_t>(spec.input_width);
    case ModelKind::Rnn: return static_cast<std::size_t>(spec.lstm_cells);
    case ModelKind::Cnn: return static_cast<std::size_t>(conv_shapes(spec).back().out_size());
  }
  return 0;
}

std::vector<ParamShape> param_layout(const ModelSpec& spec) {
  spec.validate();
  std::vector<ParamShape> out;
  const auto add_dense = [&](const std::string& prefix, std::size_t in, std::size_t width) {
    out.push_back({prefix + ".W", {in, width}, double(in), double(width), false});
    out.push_back({prefix + ".b", {width}, 0, 0, true});
  };

  if (spec.kind == ModelKind::Rnn) {
    const auto h = static_cast<std::size_t>(spec.lstm_cells);
    for (int l = 0; l < spec.lstm_layers; ++l) {
      const std::size_t in = l == 0 ? static_cast<std::size_t>(spec.step_width) : h;
      const std::string p = "lstm" + std::to_string(l);
      out.push_back({p + ".Wx", {in, 4 * h}, double(in), double(4 * h), false});
      out.push_back({p + ".Wh", {h, 4 * h}, double(h), double(4 * h), false});
      out.push_back({p + ".b", {4 * h}, 0, 0, true});
    }
  }
  if (spec.kind == ModelKind::Cnn) {
    const auto shapes = conv_shapes(spec);
    for (std::size_t k = 0; k < shapes.size(); ++k) {
      const auto& s = shapes[k];
      const std::string p = "conv" + std::to_string(k);
      const double area = double(s.kernel_h) * s.kernel_w;
      out.push_back({p + ".K",
                     {std::size_t(s.out_c), std::size_t(s.in_c), std::size_t(s.kernel_h), std::size_t(s.kernel_w)},
                     s.in_c * area, s.out_c * area, false});
      out.push_back({p + ".b", {std::size_t(s.out_c)}, 0, 0, true});
    }
  }
  std::size_t in = head_input_width(spec);
  for (std::size_t k = 0; k < spec.hidden.size(); ++k) {
    add_dense("dense" + std::to_string(k), in, static_cast<std::size_t>(spec.hidden[k]));
    in = static_cast<std::size_t>(spec.hidden[k]);
  }
  add_dense("out", in, static_cast<std::size_t>(spec.n_outputs));
  return out;
}

ParamSet init_params(const ModelSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ParamSet params;
  for (const auto& shape : param_layout(spec)) {
    Tensor t(shape.dims);
    if (shape.bias) {
      if (shape.name.starts_with("lstm")) {
        // Forget gate is the second of four column blocks.
        const std::size_t h = t.size() / 4;
        std::fill(t.data.begin() + static_cast<std::ptrdiff_t>(h), t.data.begin() + static_cast<std::ptrdiff_t>(2 * h), 1.0);
      }
    } else {
      const double r = std::sqrt(6.0 / (shape.fan_in + shape.fan_out));
      std::uniform_real_distribution<double> dist(-r, r);
      for (auto& x : t.data) x = dist(rng);
    }
    params.entries.push_back({shape.name, std::move(t)});
  }
  return params;
}

void check_params(const ModelSpec& spec, const ParamSet& params) {
  const auto layout = param_layout(spec);
  if (layout.size() != params.entries.size()) {
    throw Error(ErrorCode::ShapeMismatch, "parameter set does not match the model spec");
  }
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& e = params.entries[i];
    const auto n = std::accumulate(e.value.dims.begin(), e.value.dims.end(), std::size_t{1}, std::multiplies<>());
    if (e.name != layout[i].name || e.value.dims != layout[i].dims || e.value.data.size() != n) {
      throw Error(ErrorCode::ShapeMismatch, "parameter '" + layout[i].name + "' has the wrong name or shape");
    }
  }
}

}  // namespace diar::nn
