// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "diar/labelset.hpp"

namespace diar {

/// Row-major n_segments x samples_per_segment matrix of one channel.
struct SegmentMatrix {
  std::size_t n_segments = 0;
  std::size_t samples_per_segment = 0;
  double segment_duration = 0.1;
  double effective_rate = 0.0;
  std::vector<double> data;

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data).subspan(i * samples_per_segment, samples_per_segment);
  }
};

struct AlignedDataset {
  SegmentMatrix segments;
  LabelVector labels;
  std::string source_id;
};

/// samples_per_segment = floor(effective_rate * segment_duration).
std::size_t samples_per_segment(double effective_rate, double segment_duration);

/// Slices `channel` into consecutive non-overlapping segments; a trailing
/// partial segment is discarded.
SegmentMatrix segment_channel(std::span<const double> channel, double effective_rate,
                              double segment_duration);

/// Decimates every row independently (keep 1 of `rate`, residue dropped).
/// Rows stay aligned with the original segment boundaries.
SegmentMatrix downsample_segments(const SegmentMatrix& segments, std::size_t rate);

/// Truncates both sides to the shorter length.
AlignedDataset align(SegmentMatrix segments, LabelVector labels, std::string source_id = {});

}  // namespace diar
