// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "diar/labelset.hpp"
#include "diar/nn.hpp"
#include "diar/segmenter.hpp"

namespace diar {

struct SplitPlan {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::uint64_t seed = 0;

  bool operator==(const SplitPlan&) const = default;
};

/// Seeded shuffle, then validation = floor(0.15 n), test = floor(0.15 n),
/// train = the rest. Needs at least three files.
SplitPlan split_files(std::vector<std::string> file_ids, std::uint64_t seed);

/// Reshapes a segment into steps x floor(len/steps), dropping the residue.
nn::Tensor prepare_rnn_input(std::span<const double> segment, int steps);

/// Named configurations: slp-100, slp-200, slp-500, mlp-100-50,
/// mlp-200-100, mlp-300-50, rnn-3x150, cnn.
std::vector<std::string> catalog_names();
nn::ModelSpec catalog_spec(std::string_view name, int n_outputs = 1);

/// Stand-in convolutional layout for spectrogram input:
/// conv 16 3x3 + pool 2x2, conv 32 3xk (k = remaining width, at most 3),
/// dense 64, output.
nn::ModelSpec default_cnn(std::array<int, 3> input_shape, int n_outputs = 1);

/// Rows of one source (a file channel, or a whole file in the four-class
/// scheme) ready for a network. Items of the same file share file_id.
struct TrainItem {
  std::string file_id;
  nn::Tensor inputs;  // n_segments x input_size
  std::vector<int> labels;
};

TrainItem make_item(const AlignedDataset& data, std::string file_id);

struct DatasetSplits {
  std::vector<TrainItem> train;
  std::vector<TrainItem> validation;
  std::vector<TrainItem> test;
};

struct Hyperparams {
  std::size_t batch_size = 128;
  std::size_t epochs = 10;
  double learning_rate = 0.001;
  double dropout = 0.0;
  std::size_t eval_every = 50;  // batches; 0 disables periodic validation
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
};

struct ValidationPoint {
  std::size_t batch = 0;  // global batch counter when measured
  double accuracy = 0.0;
};

struct FileAccuracy {
  std::string file_id;
  double accuracy = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::vector<double> batch_losses;
  std::vector<ValidationPoint> validation;
  std::vector<FileAccuracy> test;
  double mean_test_accuracy = 0.0;
  double test_majority_baseline = 0.0;
  double wall_seconds = 0.0;
};

using ProgressFn = std::function<void(std::string_view)>;

/// Mini-batch Adam on globally shuffled training rows. Deterministic in
/// hp.seed (apart from wall_seconds).
struct TrainResult {
  nn::ParamSet params;
  TrainReport report;
};
TrainResult train(const nn::ModelSpec& spec, const DatasetSplits& data, const Hyperparams& hp,
                  const ProgressFn& progress = {});

LabelVector predict_segments(const nn::ModelSpec& spec, const nn::ParamSet& params, const nn::Tensor& inputs);
LabelVector predict_segments(const nn::ModelSpec& spec, const nn::ParamSet& params, const SegmentMatrix& segments);

double file_accuracy(std::span<const int> predicted, std::span<const int> truth);
double average_accuracy(std::span<const double> per_file);
double majority_baseline(std::span<const int> labels);

/// Accuracy per distinct file_id (segments of all its items pooled), in
/// order of first appearance.
std::vector<FileAccuracy> evaluate_files(const nn::ModelSpec& spec, const nn::ParamSet& params,
                                         std::span<const TrainItem> items);

/// Mean over files of the per-file majority baseline.
double mean_majority_baseline(std::span<const TrainItem> items);

/// Line-oriented log and key=value summary.
std::string format_train_log(const TrainReport& report);
std::string format_train_summary(const TrainReport& report);

}  // namespace diar
