// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace diar {

using Samples = std::vector<double>;

/// Decoded PCM audio. Every channel has the same length and every sample
/// lies in [-1, 1].
struct AudioClip {
  int sample_rate = 0;
  std::vector<Samples> channels;

  std::size_t frames() const { return channels.empty() ? 0 : channels.front().size(); }
  double duration_sec() const {
    return sample_rate > 0 ? static_cast<double>(frames()) / sample_rate : 0.0;
  }
};

/// RMS loudness relative to full scale: 20*log10(rms).
struct Loudness {
  double dbfs = 0.0;
};

/// Reads a RIFF/WAVE PCM16 file with one or two channels. Integer sample s
/// decodes to s/32768. Unknown chunks before "data" are skipped.
AudioClip read_wav(const std::filesystem::path& path);

/// Writes `clip` as PCM16. Amplitude a encodes to round(a*32768), clamped
/// to [-32768, 32767], so decode and encode are exact inverses on the
/// 16-bit grid.
void write_wav(const AudioClip& clip, const std::filesystem::path& path);

/// Validates the AudioClip invariants, throwing on violation.
void validate_clip(const AudioClip& clip);

Loudness measure_dbfs(std::span<const double> channel);

/// Scales each channel independently so that its RMS loudness equals
/// `target`. Samples pushed outside [-1, 1] are clamped with a warning.
AudioClip normalize_to_dbfs(const AudioClip& clip, Loudness target);

/// Keeps input[i*rate] for i < floor(len/rate); a trailing partial group is
/// dropped.
Samples downsample(std::span<const double> channel, std::size_t rate);

}  // namespace diar
