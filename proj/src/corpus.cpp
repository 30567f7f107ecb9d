// SPDX-License-Identifier: Apache-2.0
#include "diar/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "diar/error.hpp"

namespace diar {
namespace {

constexpr int kMaxPlacementAttempts = 10000;
constexpr double kFractionTolerance = 0.05;

struct Burst {
  double start;
  double end;
};

double round_micro(double t) { return std::round(t * 1e6) / 1e6; }

// Alternating silence/speech runs covering [0, duration); rejection-sampled
// until both the continuous and the segment-grid speech fractions are
// within tolerance of the target.
std::vector<Burst> place_bursts(const CorpusSpec& spec, std::mt19937_64& rng) {
  const double mean_burst = 2.0;
  const double mean_gap = mean_burst * (1.0 - spec.speech_fraction) / spec.speech_fraction;
  std::uniform_real_distribution<double> burst_len(0.5 * mean_burst, 1.5 * mean_burst);
  std::uniform_real_distribution<double> gap_len(0.5 * mean_gap, 1.5 * mean_gap);
  const auto n_segments = static_cast<std::size_t>(std::floor(spec.duration / spec.segment_duration + 1e-9));

  for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
    std::vector<Burst> bursts;
    // Start inside a gap of random phase so files do not all open silent
    // for the same length.
    double t = round_micro(std::uniform_real_distribution<double>(0.0, mean_gap)(rng));
    while (t < spec.duration) {
      const double end = round_micro(std::min(spec.duration, t + burst_len(rng)));
      if (end - t >= 0.05) bursts.push_back({t, end});
      t = round_micro(end + gap_len(rng));
    }
    double speech = 0.0;
    IntervalTable table;
    for (const auto& b : bursts) {
      speech += b.end - b.start;
      table.rows.push_back({b.start, std::string(kTierCh1), std::string(kTextSpeech), b.end});
    }
    const double fraction = speech / spec.duration;
    const auto labels = intervals_to_labels(table, kTierCh1, n_segments, spec.segment_duration);
    const double label_fraction =
        n_segments == 0 ? fraction
                        : static_cast<double>(std::count(labels.classes.begin(), labels.classes.end(), 1)) /
                              static_cast<double>(n_segments);
    if (std::abs(fraction - spec.speech_fraction) <= kFractionTolerance &&
        std::abs(label_fraction - spec.speech_fraction) <= kFractionTolerance) {
      return bursts;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "could not place speech bursts at the requested fraction");
}

// Three harmonics of a slowly vibrating fundamental under a syllable-rate
// envelope, with 10 ms fades at the burst edges. Unit RMS before fades.
void render_speech(std::vector<double>& out, const std::vector<Burst>& bursts, int rate, double level,
                   std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double f0 = 100.0 + 140.0 * u01(rng);
  const double syllable_hz = 3.0 + 3.0 * u01(rng);
  const std::array<double, 3> amp{1.0, 0.5, 0.25};
  // RMS of the harmonic stack times RMS of the 0.55 + 0.45 sin envelope.
  const double harmonic_rms = std::sqrt((1.0 + 0.25 + 0.0625) / 2.0);
  const double envelope_rms = std::sqrt(0.55 * 0.55 + 0.45 * 0.45 / 2.0);
  const double norm = level / (harmonic_rms * envelope_rms);
  const double fade = 0.01;

  for (const auto& b : bursts) {
    const auto first = static_cast<std::size_t>(std::ceil(b.start * rate));
    const auto last = std::min(out.size(), static_cast<std::size_t>(std::ceil(b.end * rate)));
    const double env_phase = 2.0 * std::numbers::pi * u01(rng);
    double phase = 2.0 * std::numbers::pi * u01(rng);
    for (std::size_t n = first; n < last; ++n) {
      const double t = static_cast<double>(n) / rate;
      const double f = f0 * (1.0 + 0.03 * std::sin(2.0 * std::numbers::pi * 2.5 * t));
      phase += 2.0 * std::numbers::pi * f / rate;
      double s = 0.0;
      for (std::size_t h = 0; h < amp.size(); ++h) s += amp[h] * std::sin(static_cast<double>(h + 1) * phase);
      double env = 0.55 + 0.45 * std::sin(2.0 * std::numbers::pi * syllable_hz * t + env_phase);
      env *= std::min({1.0, (t - b.start) / fade, (b.end - t) / fade});
      out[n] += norm * env * s;
    }
  }
}

}  // namespace

void CorpusSpec::validate() const {
  if (n_files == 0) throw Error(ErrorCode::InvalidArgument, "corpus needs at least one file");
  if (!(duration >= 1.0)) throw Error(ErrorCode::InvalidArgument, "corpus duration must be at least 1 s");
  if (!(speech_fraction > 0.0 && speech_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "speech_fraction must lie in (0, 1)");
  }
  if (sample_rate <= 0) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  if (!(segment_duration > 0.0)) throw Error(ErrorCode::InvalidArgument, "segment duration must be positive");
}

SynthFile synth_file(const CorpusSpec& spec, std::size_t index) {
  spec.validate();
  std::seed_seq seq{spec.seed, std::uint64_t{index}};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  char id[32];
  std::snprintf(id, sizeof id, "synth_%03zu", index);
  SynthFile file;
  file.id = id;

  const auto frames = static_cast<std::size_t>(std::llround(spec.duration * spec.sample_rate));
  const double duration = static_cast<double>(frames) / spec.sample_rate;
  // Whole-file loudness varies so that level normalization matters.
  const double file_level_db = -32.0 + 20.0 * u01(rng);

  std::array<std::vector<Burst>, 2> bursts;
  std::array<std::vector<double>, 2> voice;
  for (int k = 0; k < 2; ++k) {
    CorpusSpec s = spec;
    s.duration = duration;
    bursts[k] = place_bursts(s, rng);
    voice[k].assign(frames, 0.0);
    const double level = std::pow(10.0, (file_level_db + 6.0 * (u01(rng) - 0.5)) / 20.0);
    render_speech(voice[k], bursts[k], spec.sample_rate, level, rng);
  }

  const double crosstalk = std::pow(10.0, spec.crosstalk_db / 20.0);
  std::normal_distribution<double> noise(0.0, std::pow(10.0, spec.noise_dbfs / 20.0));
  file.clip.sample_rate = spec.sample_rate;
  file.clip.channels.assign(2, Samples(frames));
  for (int k = 0; k < 2; ++k) {
    auto& ch = file.clip.channels[static_cast<std::size_t>(k)];
    const auto& own = voice[static_cast<std::size_t>(k)];
    const auto& other = voice[static_cast<std::size_t>(1 - k)];
    for (std::size_t n = 0; n < frames; ++n) {
      ch[n] = std::clamp(own[n] + crosstalk * other[n] + noise(rng), -1.0, 1.0);
    }
  }

  for (int k = 0; k < 2; ++k) {
    const std::string tier(k == 0 ? kTierCh1 : kTierCh2);
    double t = 0.0;
    for (const auto& b : bursts[static_cast<std::size_t>(k)]) {
      if (b.start > t) file.labels.rows.push_back({t, tier, std::string(kTextNonSpeech), b.start});
      file.labels.rows.push_back({b.start, tier, std::string(kTextSpeech), b.end});
      t = b.end;
    }
    const double end = round_micro(duration);
    if (end > t) file.labels.rows.push_back({t, tier, std::string(kTextNonSpeech), end});
  }
  std::stable_sort(file.labels.rows.begin(), file.labels.rows.end(),
                   [](const IntervalRow& a, const IntervalRow& b) { return a.tmin < b.tmin; });
  return file;
}

std::vector<CorpusEntry> synth_corpus(const CorpusSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw Error(ErrorCode::Io, "cannot create directory " + out_dir.string());
  }
  std::vector<CorpusEntry> entries;
  for (std::size_t i = 0; i < spec.n_files; ++i) {
    const auto file = synth_file(spec, i);
    CorpusEntry e{file.id, out_dir / (file.id + ".wav"), out_dir / (file.id + ".csv")};
    write_wav(file.clip, e.wav);
    std::ofstream csv(e.csv, std::ios::binary | std::ios::trunc);
    if (!csv) throw Error(ErrorCode::Io, "cannot write " + e.csv.string());
    csv << format_label_csv(file.labels);
    if (!csv) throw Error(ErrorCode::Io, "failed writing " + e.csv.string());
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace diar
