// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "diar/error.hpp"
#include "network.hpp"

namespace diar::nn {
namespace {

// Batches are processed in fixed-size row chunks whose gradients are summed
// in chunk order, so results do not depend on the number of threads.
constexpr std::size_t kChunkRows = 32;

unsigned worker_count() {
  if (const char* env = std::getenv("DIAR_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

template <typename Fn>
void for_each_chunk(std::size_t n_chunks, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n_chunks);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_chunks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n_chunks;) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

void check_batch(const ModelSpec& spec, const Tensor& batch) {
  if (batch.dims.size() < 2 || batch.row_width() != spec.input_size()) {
    throw Error(ErrorCode::ShapeMismatch, "batch rows have " + std::to_string(batch.row_width()) +
                                              " values but the model expects " + std::to_string(spec.input_size()));
  }
}

ConstMatMap chunk_view(const Tensor& batch, std::size_t chunk, std::size_t& rows) {
  const std::size_t first = chunk * kChunkRows;
  rows = std::min(kChunkRows, batch.rows() - first);
  const std::size_t width = batch.row_width();
  return {batch.data.data() + first * width, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width)};
}

std::size_t chunk_count(const Tensor& batch) { return (batch.rows() + kChunkRows - 1) / kChunkRows; }

}  // namespace

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - mx);
    sum += p[k];
  }
  for (auto& v : p) v /= sum;
  return p;
}

double sigmoid_cross_entropy(double logit, int label) {
  // softplus(z) - y*z
  const double softplus = std::max(logit, 0.0) + std::log1p(std::exp(-std::abs(logit)));
  return softplus - label * logit;
}

double softmax_cross_entropy(std::span<const double> logits, int label) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - mx);
  return mx + std::log(sum) - logits[static_cast<std::size_t>(label)];
}

Tensor forward(const ModelSpec& spec, const ParamSet& params, const Tensor& batch) {
  check_params(spec, params);
  check_batch(spec, batch);
  Tensor logits({batch.rows(), static_cast<std::size_t>(spec.n_outputs)});
  for_each_chunk(chunk_count(batch), [&](std::size_t chunk) {
    std::size_t rows = 0;
    const auto x = chunk_view(batch, chunk, rows);
    Network net(spec, params);
    const Mat out = net.forward(x, nullptr);
    std::copy(out.data(), out.data() + out.size(), logits.data.begin() + static_cast<std::ptrdiff_t>(chunk * kChunkRows * spec.n_outputs));
  });
  return logits;
}

LossAndGrad loss_and_grad(const ModelSpec& spec, const ParamSet& params, const Tensor& batch,
                          std::span<const int> labels, const LossOptions& options) {
  check_params(spec, params);
  check_batch(spec, batch);
  if (labels.size() != batch.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "label count does not match batch rows");
  }
  if (batch.rows() == 0) {
    throw Error(ErrorCode::InvalidArgument, "empty batch");
  }
  const int n_classes = spec.n_outputs == 1 ? 2 : spec.n_outputs;
  for (int y : labels) {
    if (y < 0 || y >= n_classes) {
      throw Error(ErrorCode::InvalidArgument, "label " + std::to_string(y) + " is outside the model's class range");
    }
  }

  const std::size_t n_chunks = chunk_count(batch);
  const double inv_batch = 1.0 / static_cast<double>(batch.rows());
  std::vector<ParamSet> chunk_grads(n_chunks);
  std::vector<double> chunk_loss(n_chunks, 0.0);
  LossAndGrad result;
  result.logits = Tensor({batch.rows(), static_cast<std::size_t>(spec.n_outputs)});

  for_each_chunk(n_chunks, [&](std::size_t chunk) {
    std::size_t rows = 0;
    const auto x = chunk_view(batch, chunk, rows);
    std::optional<std::mt19937_64> rng;
    if (options.dropout_seed && spec.dropout > 0.0) {
      std::seed_seq seq{*options.dropout_seed, std::uint64_t{chunk}};
      rng.emplace(seq);
    }
    Network net(spec, params);
    const Mat logits = net.forward(x, rng ? &*rng : nullptr);
    std::copy(logits.data(), logits.data() + logits.size(),
              result.logits.data.begin() + static_cast<std::ptrdiff_t>(chunk * kChunkRows * spec.n_outputs));

    Mat dlogits(logits.rows(), logits.cols());
    double loss = 0.0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      const int y = labels[chunk * kChunkRows + static_cast<std::size_t>(r)];
      if (spec.n_outputs == 1) {
        const double z = logits(r, 0);
        loss += sigmoid_cross_entropy(z, y);
        dlogits(r, 0) = (sigmoid(z) - y) * inv_batch;
      } else {
        const std::span<const double> row(logits.data() + r * logits.cols(), static_cast<std::size_t>(logits.cols()));
        loss += softmax_cross_entropy(row, y);
        const auto p = softmax(row);
        for (Eigen::Index k = 0; k < logits.cols(); ++k) {
          dlogits(r, k) = (p[static_cast<std::size_t>(k)] - (k == y ? 1.0 : 0.0)) * inv_batch;
        }
      }
    }
    chunk_loss[chunk] = loss;
    chunk_grads[chunk] = params.zeros_like();
    net.backward(dlogits, chunk_grads[chunk]);
  });

  result.grads = std::move(chunk_grads[0]);
  double loss = chunk_loss[0];
  for (std::size_t c = 1; c < n_chunks; ++c) {
    loss += chunk_loss[c];
    for (std::size_t i = 0; i < result.grads.entries.size(); ++i) {
      auto& dst = result.grads.entries[i].value.data;
      const auto& src = chunk_grads[c].entries[i].value.data;
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
  }
  result.loss = loss * inv_batch;
  return result;
}

std::vector<int> predict_classes(const Tensor& logits) {
  const std::size_t width = logits.row_width();
  std::vector<int> out(logits.rows());
  for (std::size_t r = 0; r < out.size(); ++r) {
    const double* row = logits.data.data() + r * width;
    if (width == 1) {
      out[r] = row[0] > 0.0 ? 1 : 0;
    } else {
      out[r] = static_cast<int>(std::max_element(row, row + width) - row);
    }
  }
  return out;
}

AdamState AdamState::fresh(const ParamSet& params, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  for (const auto& e : params.entries) {
    s.m.emplace_back(e.value.dims);
    s.v.emplace_back(e.value.dims);
  }
  return s;
}

void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state) {
  if (!params.same_shape(grads) || state.m.size() != params.entries.size() ||
      state.v.size() != params.entries.size()) {
    throw Error(ErrorCode::ShapeMismatch, "adam: parameters, gradients and moments differ in shape");
  }
  for (std::size_t i = 0; i < params.entries.size(); ++i) {
    if (state.m[i].dims != params.entries[i].value.dims || state.v[i].dims != params.entries[i].value.dims) {
      throw Error(ErrorCode::ShapeMismatch, "adam: moment shape mismatch for " + params.entries[i].name);
    }
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.entries.size(); ++i) {
    auto& theta = params.entries[i].value.data;
    const auto& g = grads.entries[i].value.data;
    auto& m = state.m[i].data;
    auto& v = state.v[i].data;
    for (std::size_t j = 0; j < theta.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      theta[j] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

GradCheckReport grad_check(const ModelSpec& spec, std::uint64_t seed, double tolerance, std::size_t batch_rows) {
  constexpr double h = 1e-5;
  constexpr double scale_floor = 1e-6;
  ModelSpec s = spec;
  s.dropout = 0.0;
  ParamSet params = init_params(s, seed);

  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ull);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  // Non-zero biases so ReLU and pooling kinks are exercised off-centre.
  for (auto& e : params.entries) {
    if (e.value.dims.size() == 1) {
      for (auto& b : e.value.data) b += 0.1 * u(rng);
    }
  }
  Tensor batch({batch_rows, s.input_size()});
  for (auto& x : batch.data) x = u(rng);
  std::vector<int> labels(batch_rows);
  const int n_classes = s.n_outputs == 1 ? 2 : s.n_outputs;
  for (std::size_t i = 0; i < batch_rows; ++i) labels[i] = static_cast<int>(i % static_cast<std::size_t>(n_classes));

  const auto analytic = loss_and_grad(s, params, batch, labels).grads;
  GradCheckReport report;
  for (std::size_t i = 0; i < params.entries.size(); ++i) {
    auto& theta = params.entries[i].value.data;
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double saved = theta[j];
      theta[j] = saved + h;
      const double up = loss_and_grad(s, params, batch, labels).loss;
      theta[j] = saved - h;
      const double down = loss_and_grad(s, params, batch, labels).loss;
      theta[j] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic.entries[i].value.data[j];
      const double diff = std::abs(a - numeric);
      const double rel = diff / std::max({std::abs(a), std::abs(numeric), scale_floor});
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = params.entries[i].name + "[" + std::to_string(j) + "]";
      }
      ++report.checked;
    }
  }
  report.passed = report.max_rel_error <= tolerance;
  return report;
}

}  // namespace diar::nn
