// SPDX-License-Identifier: Apache-2.0
#include "diar/segmenter.hpp"

#include <algorithm>
#include <cmath>

#include "diar/audio_io.hpp"
#include "diar/error.hpp"

namespace diar {

std::size_t samples_per_segment(double effective_rate, double segment_duration) {
  if (!(effective_rate > 0.0) || !(segment_duration > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "rate and segment duration must be positive");
  }
  return static_cast<std::size_t>(std::floor(effective_rate * segment_duration + 1e-9));
}

SegmentMatrix segment_channel(std::span<const double> channel, double effective_rate,
                              double segment_duration) {
  const std::size_t w = samples_per_segment(effective_rate, segment_duration);
  if (w == 0) {
    throw Error(ErrorCode::InvalidArgument, "segment is shorter than one sample");
  }
  SegmentMatrix m;
  m.n_segments = channel.size() / w;
  m.samples_per_segment = w;
  m.segment_duration = segment_duration;
  m.effective_rate = effective_rate;
  m.data.assign(channel.begin(), channel.begin() + static_cast<std::ptrdiff_t>(m.n_segments * w));
  return m;
}

SegmentMatrix downsample_segments(const SegmentMatrix& segments, std::size_t rate) {
  if (rate == 0) {
    throw Error(ErrorCode::InvalidArgument, "downsample rate must be at least 1");
  }
  SegmentMatrix out;
  out.n_segments = segments.n_segments;
  out.samples_per_segment = segments.samples_per_segment / rate;
  out.segment_duration = segments.segment_duration;
  out.effective_rate = segments.effective_rate / static_cast<double>(rate);
  out.data.reserve(out.n_segments * out.samples_per_segment);
  for (std::size_t i = 0; i < segments.n_segments; ++i) {
    const auto row = downsample(segments.row(i), rate);
    out.data.insert(out.data.end(), row.begin(), row.end());
  }
  return out;
}

AlignedDataset align(SegmentMatrix segments, LabelVector labels, std::string source_id) {
  if (segments.n_segments == 0 || labels.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, "cannot align an empty segment matrix or label vector");
  }
  const std::size_t n = std::min(segments.n_segments, labels.size());
  segments.n_segments = n;
  segments.data.resize(n * segments.samples_per_segment);
  labels.classes.resize(n);
  return {std::move(segments), std::move(labels), std::move(source_id)};
}

}  // namespace diar
