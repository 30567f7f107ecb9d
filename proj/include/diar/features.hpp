// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace diar {

enum class WindowKind : std::uint32_t {
  Tukey25 = 1,  // periodic Tukey window, shape parameter 0.25
};

/// STFT settings. The defaults turn a 1102-sample segment into a 129 x 4
/// one-sided power spectral density.
struct StftParams {
  std::uint32_t window = 256;
  std::uint32_t hop = 224;
  std::uint32_t fft_size = 256;
  WindowKind kind = WindowKind::Tukey25;
  bool log_power = false;  // 10*log10(psd + 1e-12) instead of psd

  std::size_t height() const { return fft_size / 2 + 1; }
  std::size_t frames(std::size_t n_samples) const {
    return n_samples < window ? 0 : 1 + (n_samples - window) / hop;
  }
  bool operator==(const StftParams&) const = default;
};

/// height x width magnitudes, row-major (frequency, time).
struct Spectrogram {
  std::size_t height = 0;
  std::size_t width = 0;
  double bin_hz = 0.0;
  std::vector<double> magnitudes;

  double at(std::size_t freq, std::size_t frame) const { return magnitudes[freq * width + frame]; }
};

std::vector<double> make_window(const StftParams& params);

Spectrogram spectrogram(std::span<const double> segment, double sample_rate,
                        const StftParams& params = {});

/// One cached (n_segments, height, width) array in single precision.
struct FeatureArray {
  std::array<std::uint32_t, 3> dims{};
  std::vector<float> values;

  bool operator==(const FeatureArray&) const = default;
};

struct FeatureCache {
  StftParams params;
  std::map<std::string, FeatureArray> entries;

  bool operator==(const FeatureCache&) const = default;
};

/// Stacks per-segment spectrograms of a downsampled segment matrix.
FeatureArray spectrogram_stack(std::span<const double> rows, std::size_t row_width,
                               double sample_rate, const StftParams& params = {});

/// Adds the entries of `other`; parameters must match and ids must not
/// collide.
void cache_merge(FeatureCache& into, const FeatureCache& other);

std::vector<std::uint8_t> encode_cache(const FeatureCache& cache);
FeatureCache decode_cache(std::span<const std::uint8_t> bytes);

/// "DKFC" v1 file, written atomically.
void cache_write(const FeatureCache& cache, const std::filesystem::path& path);
FeatureCache cache_read(const std::filesystem::path& path);

}  // namespace diar
