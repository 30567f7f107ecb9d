// SPDX-License-Identifier: Apache-2.0
//
// End-to-end stages behind the command-line tool: normalize, synth,
// prepare, train, evaluate, predict and plot.
#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "diar/config.hpp"
#include "diar/corpus.hpp"
#include "diar/features.hpp"
#include "diar/nn.hpp"
#include "diar/plot.hpp"
#include "diar/segmenter.hpp"
#include "diar/trainer.hpp"

namespace diar::pipeline {

using LineFn = std::function<void(std::string_view)>;

namespace fs = std::filesystem;

/// Writes each input normalized to settings.target_dbfs under `out_dir`
/// with the same file name.
std::vector<fs::path> normalize_files(const Settings& settings, const std::vector<fs::path>& inputs,
                                      const fs::path& out_dir);

std::vector<CorpusEntry> synth(const Settings& settings, const fs::path& out_dir);

struct PreparedEntry {
  std::string file_id;
  fs::path wav;
  fs::path csv;
  int sample_rate = 0;
  std::size_t n_segments = 0;
  std::array<double, 2> speech_fraction{};  // share of 1-labels per channel
};

struct Prepared {
  fs::path dir;
  Settings settings;  // preprocessing settings used by prepare
  std::vector<PreparedEntry> entries;
  SplitPlan split;
  bool has_features = false;
};

/// Both channels of one file, normalized (if enabled), segmented at the
/// original rate, decimated per row and aligned with their labels.
std::array<AlignedDataset, 2> load_channels(const Settings& settings, const fs::path& wav, const fs::path& csv,
                                            const std::string& file_id);

/// Scans `data_dir` for NAME.wav / NAME.csv pairs and writes manifest.tsv,
/// split.tsv, prepare.conf and, for cnn models, features.dkfc.
Prepared prepare(const Settings& settings, const fs::path& data_dir, const fs::path& out_dir,
                 const LineFn& progress = {});
Prepared load_prepared(const fs::path& dir);

/// Model architecture for the configured model name and input geometry.
nn::ModelSpec model_spec_for(const Settings& settings, std::size_t segment_width,
                             std::array<int, 2> spectrogram_shape = {129, 4});

/// Network-ready rows for the given files of a prepared corpus.
std::vector<TrainItem> build_items(const Prepared& prepared, const nn::ModelSpec& spec, int classes,
                                   const std::vector<std::string>& file_ids, const FeatureCache* features);

/// Trains on the prepared split and writes model.dknn, train.log and
/// summary.txt into `out_dir`.
TrainReport train(const Settings& settings, const fs::path& prepared_dir, const fs::path& out_dir,
                  const LineFn& progress = {});

/// Per-file accuracies of a checkpoint on one split (train, validation or
/// test) of a prepared corpus.
std::vector<FileAccuracy> evaluate(const fs::path& model_path, const fs::path& prepared_dir,
                                   std::string_view split);

/// Predicted per-channel label vectors for a WAV file.
std::vector<LabelVector> predict_file(const nn::Checkpoint& model, const fs::path& wav);

/// Writes predicted speech intervals as a label CSV.
void predict(const fs::path& model_path, const fs::path& wav, const fs::path& out_csv);

/// Renders truth (from `csv`) against the model's prediction for one
/// channel (1 or 2).
void plot(const fs::path& model_path, const fs::path& wav, const fs::path& csv, int channel, PlotRange range,
          const fs::path& out_svg);

}  // namespace diar::pipeline
