// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "diar/audio_io.hpp"
#include "diar/labelset.hpp"

namespace diar {

/// Synthetic two-speaker conversations with exact interval labels.
struct CorpusSpec {
  std::size_t n_files = 10;
  double duration = 60.0;        // seconds per file
  double speech_fraction = 0.4;  // per channel, accepted within +-0.05
  double noise_dbfs = -50.0;     // background noise RMS
  double crosstalk_db = -20.0;   // the other speaker's level on each microphone
  std::uint64_t seed = 0;
  int sample_rate = 44100;
  double segment_duration = 0.1;  // label grid used by the fraction check

  void validate() const;
};

struct SynthFile {
  std::string id;
  AudioClip clip;
  IntervalTable labels;
};

/// File `index` of the corpus; independent of the other files.
SynthFile synth_file(const CorpusSpec& spec, std::size_t index);

struct CorpusEntry {
  std::string id;
  std::filesystem::path wav;
  std::filesystem::path csv;
};

/// Writes synth_NNN.wav / synth_NNN.csv pairs into `out_dir`.
std::vector<CorpusEntry> synth_corpus(const CorpusSpec& spec, const std::filesystem::path& out_dir);

}  // namespace diar
