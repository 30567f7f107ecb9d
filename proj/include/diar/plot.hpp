// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "diar/labelset.hpp"

namespace diar {

/// Segment window [from, to) drawn by the comparison plot; `to` is clipped
/// to the label length.
struct PlotRange {
  std::size_t from = 0;
  std::size_t to = static_cast<std::size_t>(-1);
};

/// Standalone SVG with a truth track above a prediction track. Every
/// non-zero label inside the range becomes one vertical tick
/// (<line class="tick truth|pred">) at its segment index.
std::string comparison_svg(const LabelVector& truth, const LabelVector& pred, PlotRange range = {});

void render_comparison(const LabelVector& truth, const LabelVector& pred, const std::filesystem::path& out,
                       PlotRange range = {});

}  // namespace diar
