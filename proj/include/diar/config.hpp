// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace diar {

/// Plain key=value settings. Blank lines and lines starting with '#' are
/// ignored; later assignments win.
class Config {
 public:
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  void set(std::string key, std::string value);
  void merge(const Config& overrides);
  std::optional<std::string> get(std::string_view key) const;
  const std::map<std::string, std::string, std::less<>>& values() const { return values_; }

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

/// Every tunable of the pipeline with its default. Keys use the long flag
/// spelling (segment-sec, target-dbfs, ...).
struct Settings {
  std::uint64_t seed = 0;
  double segment_sec = 0.1;
  std::size_t downsample = 4;
  double target_dbfs = -20.0;
  bool normalize = true;  // prepare/predict normalize channels in memory

  std::string model = "slp";  // slp, mlp, rnn, cnn or a catalog name
  int classes = 2;
  std::vector<int> hidden;  // empty: the model's default widths
  int lstm_layers = 3;
  int lstm_cells = 150;
  int steps = 22;
  bool log_power = false;

  std::size_t epochs = 10;
  std::size_t batch = 128;
  double lr = 0.001;
  double dropout = 0.0;
  std::size_t eval_every = 50;

  std::size_t n_files = 10;
  double duration = 60.0;
  double speech_fraction = 0.4;
  double noise_dbfs = -50.0;
  double crosstalk_db = -20.0;

  /// Unknown keys and unparseable values throw Error(Usage).
  static Settings from_config(const Config& config);
  Config to_config() const;
};

/// Known setting keys, in documentation order.
const std::vector<std::string>& settings_keys();

}  // namespace diar
