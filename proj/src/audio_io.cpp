// SPDX-License-Identifier: Apache-2.0
#include "diar/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "binary_io.hpp"
#include "diar/error.hpp"
#include "diar/log.hpp"

namespace diar {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr double kPcm16Scale = 32768.0;

std::int16_t encode_sample(double a) {
  const double s = std::round(a * kPcm16Scale);
  return static_cast<std::int16_t>(std::clamp(s, -32768.0, 32767.0));
}

}  // namespace

void validate_clip(const AudioClip& clip) {
  if (clip.sample_rate <= 0) {
    throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  }
  if (clip.channels.empty() || clip.channels.size() > 2) {
    throw Error(ErrorCode::InvalidArgument, "clip must have 1 or 2 channels");
  }
  for (const auto& ch : clip.channels) {
    if (ch.size() != clip.channels.front().size()) {
      throw Error(ErrorCode::ShapeMismatch, "channels differ in length");
    }
  }
}

AudioClip read_wav(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  detail::ByteReader r(bytes, path.string());

  if (bytes.size() < 12 || r.get_bytes(4) != "RIFF") {
    throw Error(ErrorCode::UnsupportedFormat, path.string() + ": not a RIFF file");
  }
  r.skip(4);  // RIFF size; some writers get it wrong, so it is not trusted
  if (r.get_bytes(4) != "WAVE") {
    throw Error(ErrorCode::UnsupportedFormat, path.string() + ": not a WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t n_channels = 0;
  std::uint32_t sample_rate = 0;
  while (true) {
    if (r.remaining() < 8) {
      throw Error(ErrorCode::Truncated, path.string() + ": no data chunk");
    }
    const std::string id = r.get_bytes(4);
    const auto size = r.get<std::uint32_t>();
    if (id == "fmt ") {
      if (size < 16) {
        throw Error(ErrorCode::Malformed, path.string() + ": short fmt chunk");
      }
      const auto fmt = r.get<std::uint16_t>();
      n_channels = r.get<std::uint16_t>();
      sample_rate = r.get<std::uint32_t>();
      r.skip(6);  // byte rate, block align
      const auto bits = r.get<std::uint16_t>();
      r.skip(size - 16 + (size & 1));
      if (fmt != kFormatPcm) {
        throw Error(ErrorCode::UnsupportedFormat,
                    path.string() + ": audio format " + std::to_string(fmt) + " is not PCM");
      }
      if (bits != 16) {
        throw Error(ErrorCode::UnsupportedFormat,
                    path.string() + ": " + std::to_string(bits) + "-bit samples are not supported");
      }
      if (n_channels < 1 || n_channels > 2) {
        throw Error(ErrorCode::UnsupportedFormat,
                    path.string() + ": " + std::to_string(n_channels) + " channels are not supported");
      }
      if (sample_rate == 0) {
        throw Error(ErrorCode::Malformed, path.string() + ": zero sample rate");
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) {
        throw Error(ErrorCode::Malformed, path.string() + ": data chunk before fmt chunk");
      }
      if (size > r.remaining()) {
        throw Error(ErrorCode::Truncated, path.string() + ": data chunk declares " + std::to_string(size) +
                                              " bytes but only " + std::to_string(r.remaining()) + " remain");
      }
      const std::size_t frames = size / (2u * n_channels);
      AudioClip clip;
      clip.sample_rate = static_cast<int>(sample_rate);
      clip.channels.assign(n_channels, Samples(frames));
      for (std::size_t i = 0; i < frames; ++i) {
        for (std::size_t c = 0; c < n_channels; ++c) {
          clip.channels[c][i] = r.get<std::int16_t>() / kPcm16Scale;
        }
      }
      return clip;
    } else {
      r.skip(static_cast<std::size_t>(size) + (size & 1));
    }
  }
}

void write_wav(const AudioClip& clip, const std::filesystem::path& path) {
  validate_clip(clip);
  const auto n_channels = static_cast<std::uint16_t>(clip.channels.size());
  const std::size_t frames = clip.frames();
  const std::uint64_t data_bytes = std::uint64_t{frames} * n_channels * 2;
  if (data_bytes > 0xFFFFFFFFull - 36) {
    throw Error(ErrorCode::InvalidArgument, "clip too long for a RIFF file");
  }

  detail::ByteWriter w;
  w.put_bytes("RIFF");
  w.put(static_cast<std::uint32_t>(36 + data_bytes));
  w.put_bytes("WAVE");
  w.put_bytes("fmt ");
  w.put(std::uint32_t{16});
  w.put(kFormatPcm);
  w.put(n_channels);
  w.put(static_cast<std::uint32_t>(clip.sample_rate));
  w.put(static_cast<std::uint32_t>(clip.sample_rate) * n_channels * 2);
  w.put(static_cast<std::uint16_t>(n_channels * 2));
  w.put(std::uint16_t{16});
  w.put_bytes("data");
  w.put(static_cast<std::uint32_t>(data_bytes));
  w.bytes().reserve(w.bytes().size() + data_bytes);
  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto& ch : clip.channels) {
      w.put(encode_sample(ch[i]));
    }
  }
  detail::write_file_atomic(path, w.bytes());
}

Loudness measure_dbfs(std::span<const double> channel) {
  double sum_sq = 0.0;
  for (double s : channel) {
    sum_sq += s * s;
  }
  if (channel.empty() || sum_sq == 0.0) {
    throw Error(ErrorCode::SilentChannel, "silent channel: loudness of an all-zero signal is undefined");
  }
  const double rms = std::sqrt(sum_sq / static_cast<double>(channel.size()));
  return {20.0 * std::log10(rms)};
}

AudioClip normalize_to_dbfs(const AudioClip& clip, Loudness target) {
  validate_clip(clip);
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.channels.reserve(clip.channels.size());
  for (std::size_t c = 0; c < clip.channels.size(); ++c) {
    const auto& ch = clip.channels[c];
    const double gain = std::pow(10.0, (target.dbfs - measure_dbfs(ch).dbfs) / 20.0);
    Samples scaled(ch.size());
    std::size_t clipped = 0;
    for (std::size_t i = 0; i < ch.size(); ++i) {
      const double s = ch[i] * gain;
      if (s > 1.0 || s < -1.0) {
        ++clipped;
      }
      scaled[i] = std::clamp(s, -1.0, 1.0);
    }
    if (clipped > 0) {
      log_warning("normalization clipped " + std::to_string(clipped) + " samples in channel " +
                  std::to_string(c + 1));
    }
    out.channels.push_back(std::move(scaled));
  }
  return out;
}

Samples downsample(std::span<const double> channel, std::size_t rate) {
  if (rate == 0) {
    throw Error(ErrorCode::InvalidArgument, "downsample rate must be at least 1");
  }
  const std::size_t n = channel.size() / rate;
  Samples out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = channel[i * rate];
  }
  return out;
}

}  // namespace diar
