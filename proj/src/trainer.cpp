// SPDX-License-Identifier: Apache-2.0
#include "diar/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "diar/error.hpp"

namespace diar {
namespace {

std::size_t n_classes(const nn::ModelSpec& spec) { return spec.n_outputs == 1 ? 2 : 4; }

void check_items(const nn::ModelSpec& spec, std::span<const TrainItem> items, std::string_view split) {
  for (const auto& item : items) {
    if (item.inputs.row_width() != spec.input_size() || item.inputs.rows() != item.labels.size()) {
      throw Error(ErrorCode::ShapeMismatch, std::string(split) + " item '" + item.file_id +
                                                "' does not match the model input or its label count");
    }
    for (int y : item.labels) {
      if (y < 0 || static_cast<std::size_t>(y) >= n_classes(spec)) {
        throw Error(ErrorCode::InvalidArgument, std::string(split) + " item '" + item.file_id +
                                                    "' has a label outside the model's class range");
      }
    }
  }
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

}  // namespace

SplitPlan split_files(std::vector<std::string> file_ids, std::uint64_t seed) {
  const std::size_t n = file_ids.size();
  if (n < 3) {
    throw Error(ErrorCode::InvalidArgument, "need at least 3 files to split, got " + std::to_string(n));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(file_ids.begin(), file_ids.end(), rng);
  // floor(0.15 n) without floating-point noise.
  const std::size_t n_holdout = n * 15 / 100;
  SplitPlan plan;
  plan.seed = seed;
  plan.validation.assign(file_ids.begin(), file_ids.begin() + static_cast<std::ptrdiff_t>(n_holdout));
  plan.test.assign(file_ids.begin() + static_cast<std::ptrdiff_t>(n_holdout),
                   file_ids.begin() + static_cast<std::ptrdiff_t>(2 * n_holdout));
  plan.train.assign(file_ids.begin() + static_cast<std::ptrdiff_t>(2 * n_holdout), file_ids.end());
  return plan;
}

nn::Tensor prepare_rnn_input(std::span<const double> segment, int steps) {
  if (steps <= 0 || static_cast<std::size_t>(steps) > segment.size()) {
    throw Error(ErrorCode::InvalidArgument, "rnn steps must lie in [1, segment length]");
  }
  const std::size_t width = segment.size() / static_cast<std::size_t>(steps);
  const std::size_t used = width * static_cast<std::size_t>(steps);
  return nn::Tensor({static_cast<std::size_t>(steps), width}, std::vector<double>(segment.begin(), segment.begin() + static_cast<std::ptrdiff_t>(used)));
}

std::vector<std::string> catalog_names() {
  return {"slp-100", "slp-200", "slp-500", "mlp-100-50", "mlp-200-100", "mlp-300-50", "rnn-3x150", "cnn"};
}

nn::ModelSpec default_cnn(std::array<int, 3> input_shape, int n_outputs) {
  // After 3x3 valid conv and 2x2 pooling a 129x4 input is 63x1 wide, so the
  // second kernel narrows to the width that remains.
  const int width_after_pool = (input_shape[2] - 2) / 2;
  const int second_kw = std::clamp(width_after_pool, 1, 3);
  return nn::ModelSpec::cnn(input_shape, {{16, 3, 3, 2, 2}, {32, 3, second_kw, 1, 1}}, {64}, n_outputs);
}

nn::ModelSpec catalog_spec(std::string_view name, int n_outputs) {
  constexpr int kSegmentWidth = 1102;  // 0.1 s at 44.1 kHz, decimated by 4
  const int width = n_outputs == 4 ? 2 * kSegmentWidth : kSegmentWidth;
  if (name == "slp-100") return nn::ModelSpec::slp(width, 100, n_outputs);
  if (name == "slp-200") return nn::ModelSpec::slp(width, 200, n_outputs);
  if (name == "slp-500") return nn::ModelSpec::slp(width, 500, n_outputs);
  if (name == "mlp-100-50") return nn::ModelSpec::mlp(width, {100, 50}, n_outputs);
  if (name == "mlp-200-100") return nn::ModelSpec::mlp(width, {200, 100}, n_outputs);
  if (name == "mlp-300-50") return nn::ModelSpec::mlp(width, {300, 50}, n_outputs);
  if (name == "rnn-3x150") {
    auto s = nn::ModelSpec::rnn(width, 22, 3, 150, n_outputs);
    return s;
  }
  if (name == "cnn") return default_cnn({n_outputs == 4 ? 2 : 1, 129, 4}, n_outputs);
  throw Error(ErrorCode::InvalidArgument, "unknown catalog model '" + std::string(name) + "'");
}

TrainItem make_item(const AlignedDataset& data, std::string file_id) {
  TrainItem item;
  item.file_id = std::move(file_id);
  item.inputs = nn::Tensor({data.segments.n_segments, data.segments.samples_per_segment}, data.segments.data);
  item.labels = data.labels.classes;
  return item;
}

void Hyperparams::validate() const {
  if (batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch_size must be at least 1");
  if (epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be at least 1");
  if (!(learning_rate >= 0.0)) throw Error(ErrorCode::InvalidArgument, "learning_rate must be non-negative");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(ErrorCode::InvalidArgument, "dropout must lie in [0, 1)");
}

TrainResult train(const nn::ModelSpec& spec_in, const DatasetSplits& data, const Hyperparams& hp,
                  const ProgressFn& progress) {
  const auto started = std::chrono::steady_clock::now();
  hp.validate();
  nn::ModelSpec spec = spec_in;
  spec.dropout = hp.dropout;
  spec.validate();
  check_items(spec, data.train, "training");
  check_items(spec, data.validation, "validation");
  check_items(spec, data.test, "test");

  const std::size_t width = spec.input_size();
  std::size_t n_rows = 0;
  for (const auto& item : data.train) n_rows += item.labels.size();
  if (n_rows == 0) throw Error(ErrorCode::InvalidArgument, "empty training set");

  // Flatten training rows once; batches gather from here.
  std::vector<const double*> row_ptr;
  std::vector<int> row_label;
  row_ptr.reserve(n_rows);
  row_label.reserve(n_rows);
  for (const auto& item : data.train) {
    for (std::size_t r = 0; r < item.labels.size(); ++r) {
      row_ptr.push_back(item.inputs.data.data() + r * width);
      row_label.push_back(item.labels[r]);
    }
  }

  TrainResult result;
  result.params = nn::init_params(spec, hp.seed);
  auto adam = nn::AdamState::fresh(result.params, hp.learning_rate);
  std::mt19937_64 shuffle_rng(hp.seed + 1);
  std::vector<std::size_t> order(n_rows);
  std::iota(order.begin(), order.end(), 0);

  auto& report = result.report;
  std::size_t global_batch = 0;
  const auto validate_now = [&] {
    if (data.validation.empty()) return;
    std::vector<double> acc;
    for (const auto& f : evaluate_files(spec, result.params, data.validation)) acc.push_back(f.accuracy);
    report.validation.push_back({global_batch, average_accuracy(acc)});
    if (progress) progress("batch " + std::to_string(global_batch) + " validation accuracy " + fixed(report.validation.back().accuracy, 4));
  };

  for (std::size_t epoch = 1; epoch <= hp.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n_rows; start += hp.batch_size) {
      const std::size_t rows = std::min(hp.batch_size, n_rows - start);
      nn::Tensor batch({rows, width});
      std::vector<int> labels(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t src = order[start + r];
        std::copy(row_ptr[src], row_ptr[src] + width, batch.data.begin() + static_cast<std::ptrdiff_t>(r * width));
        labels[r] = row_label[src];
      }
      nn::LossOptions options;
      if (spec.dropout > 0.0) options.dropout_seed = hp.seed * 1000003u + global_batch;
      auto step = nn::loss_and_grad(spec, result.params, batch, labels, options);
      nn::adam_step(result.params, step.grads, adam);
      ++global_batch;

      report.batch_losses.push_back(step.loss);
      loss_sum += step.loss * static_cast<double>(rows);
      const auto predicted = nn::predict_classes(step.logits);
      for (std::size_t r = 0; r < rows; ++r) correct += predicted[r] == labels[r] ? 1 : 0;
      if (hp.eval_every > 0 && global_batch % hp.eval_every == 0) validate_now();
    }
    report.epochs.push_back({epoch, loss_sum / static_cast<double>(n_rows),
                             static_cast<double>(correct) / static_cast<double>(n_rows)});
    if (progress) {
      progress("epoch " + std::to_string(epoch) + " loss " + fixed(report.epochs.back().train_loss) +
               " accuracy " + fixed(report.epochs.back().train_accuracy, 4));
    }
  }
  if (report.validation.empty() || report.validation.back().batch != global_batch) validate_now();

  if (!data.test.empty()) {
    report.test = evaluate_files(spec, result.params, data.test);
    std::vector<double> acc;
    for (const auto& f : report.test) acc.push_back(f.accuracy);
    report.mean_test_accuracy = average_accuracy(acc);
    report.test_majority_baseline = mean_majority_baseline(data.test);
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

LabelVector predict_segments(const nn::ModelSpec& spec, const nn::ParamSet& params, const nn::Tensor& inputs) {
  LabelVector out;
  out.scheme = spec.n_outputs == 1 ? LabelScheme::Binary : LabelScheme::FourClass;
  out.classes = nn::predict_classes(nn::forward(spec, params, inputs));
  return out;
}

LabelVector predict_segments(const nn::ModelSpec& spec, const nn::ParamSet& params, const SegmentMatrix& segments) {
  auto out = predict_segments(spec, params,
                              nn::Tensor({segments.n_segments, segments.samples_per_segment}, segments.data));
  out.segment_duration = segments.segment_duration;
  return out;
}

double file_accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::ShapeMismatch, "prediction and truth differ in length");
  }
  if (truth.empty()) throw Error(ErrorCode::InvalidArgument, "accuracy of an empty file is undefined");
  std::size_t matches = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) matches += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(matches) / static_cast<double>(truth.size());
}

double average_accuracy(std::span<const double> per_file) {
  if (per_file.empty()) throw Error(ErrorCode::InvalidArgument, "no per-file accuracies to average");
  return std::accumulate(per_file.begin(), per_file.end(), 0.0) / static_cast<double>(per_file.size());
}

double majority_baseline(std::span<const int> labels) {
  if (labels.empty()) throw Error(ErrorCode::InvalidArgument, "majority baseline of no labels");
  std::map<int, std::size_t> counts;
  for (int y : labels) ++counts[y];
  std::size_t best = 0;
  for (const auto& [cls, n] : counts) best = std::max(best, n);
  return static_cast<double>(best) / static_cast<double>(labels.size());
}

std::vector<FileAccuracy> evaluate_files(const nn::ModelSpec& spec, const nn::ParamSet& params,
                                         std::span<const TrainItem> items) {
  std::vector<FileAccuracy> out;
  std::vector<std::pair<std::size_t, std::size_t>> tallies;  // matches, total
  for (const auto& item : items) {
    const auto pred = nn::predict_classes(nn::forward(spec, params, item.inputs));
    auto it = std::find_if(out.begin(), out.end(), [&](const FileAccuracy& f) { return f.file_id == item.file_id; });
    if (it == out.end()) {
      out.push_back({item.file_id, 0.0});
      tallies.emplace_back(0, 0);
      it = out.end() - 1;
    }
    auto& tally = tallies[static_cast<std::size_t>(it - out.begin())];
    for (std::size_t i = 0; i < pred.size(); ++i) tally.first += pred[i] == item.labels[i] ? 1 : 0;
    tally.second += pred.size();
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].accuracy = tallies[i].second == 0 ? 0.0 : static_cast<double>(tallies[i].first) / static_cast<double>(tallies[i].second);
  }
  return out;
}

double mean_majority_baseline(std::span<const TrainItem> items) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<int>> by_file;
  for (const auto& item : items) {
    auto [it, fresh] = by_file.try_emplace(item.file_id);
    if (fresh) order.push_back(item.file_id);
    it->second.insert(it->second.end(), item.labels.begin(), item.labels.end());
  }
  std::vector<double> baselines;
  for (const auto& id : order) baselines.push_back(majority_baseline(by_file[id]));
  return average_accuracy(baselines);
}

std::string format_train_log(const TrainReport& report) {
  std::ostringstream out;
  for (std::size_t b = 0; b < report.batch_losses.size(); ++b) {
    out << "batch " << (b + 1) << " loss " << fixed(report.batch_losses[b], 9) << '\n';
  }
  for (const auto& e : report.epochs) {
    out << "epoch " << e.epoch << " train_loss " << fixed(e.train_loss, 9) << " train_accuracy "
        << fixed(e.train_accuracy) << '\n';
  }
  for (const auto& v : report.validation) {
    out << "validation batch " << v.batch << " accuracy " << fixed(v.accuracy) << '\n';
  }
  for (const auto& t : report.test) {
    out << "test " << t.file_id << " accuracy " << fixed(t.accuracy) << '\n';
  }
  return out.str();
}

std::string format_train_summary(const TrainReport& report) {
  std::ostringstream out;
  out << "epochs=" << report.epochs.size() << '\n';
  out << "batches=" << report.batch_losses.size() << '\n';
  if (!report.epochs.empty()) {
    out << "final_train_loss=" << fixed(report.epochs.back().train_loss, 9) << '\n';
    out << "final_train_accuracy=" << fixed(report.epochs.back().train_accuracy) << '\n';
  }
  if (!report.validation.empty()) {
    out << "final_validation_accuracy=" << fixed(report.validation.back().accuracy) << '\n';
  }
  out << "test_files=" << report.test.size() << '\n';
  out << "mean_test_accuracy=" << fixed(report.mean_test_accuracy) << '\n';
  out << "test_majority_baseline=" << fixed(report.test_majority_baseline) << '\n';
  out << "wall_seconds=" << fixed(report.wall_seconds, 3) << '\n';
  return out.str();
}

}  // namespace diar
