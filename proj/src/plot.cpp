// SPDX-License-Identifier: Apache-2.0
#include "diar/plot.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "diar/error.hpp"

namespace diar {
namespace {

constexpr double kMargin = 60.0;
constexpr double kTrackHeight = 80.0;
constexpr double kTrackGap = 30.0;
constexpr double kPlotWidth = 1000.0;
constexpr std::array<const char*, 4> kClassColors{"#000000", "#1f77b4", "#d62728", "#9467bd"};

}  // namespace

std::string comparison_svg(const LabelVector& truth, const LabelVector& pred, PlotRange range) {
  if (truth.size() != pred.size()) {
    throw Error(ErrorCode::ShapeMismatch, "truth and prediction differ in length");
  }
  const std::size_t to = std::min(range.to, truth.size());
  const std::size_t from = std::min(range.from, to);
  const std::size_t span = std::max<std::size_t>(to - from, 1);
  const double step = kPlotWidth / static_cast<double>(span);
  const double height = 2 * kTrackHeight + kTrackGap + 2 * kMargin;
  const double width = kPlotWidth + 2 * kMargin;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

  const auto track = [&](const LabelVector& labels, const char* cls, const char* title, double top) {
    svg << "  <g class=\"track " << cls << "\">\n";
    svg << "    <text x=\"" << kMargin << "\" y=\"" << top - 8 << "\" font-family=\"sans-serif\" font-size=\"14\">"
        << title << "</text>\n";
    svg << "    <rect x=\"" << kMargin << "\" y=\"" << top << "\" width=\"" << kPlotWidth << "\" height=\""
        << kTrackHeight << "\" fill=\"none\" stroke=\"#999999\"/>\n";
    for (std::size_t i = from; i < to; ++i) {
      const int c = labels.classes[i];
      if (c == 0) continue;
      const double x = kMargin + (static_cast<double>(i - from) + 0.5) * step;
      svg << "    <line class=\"tick " << cls << "\" data-segment=\"" << i << "\" x1=\"" << x << "\" y1=\""
          << top << "\" x2=\"" << x << "\" y2=\"" << top + kTrackHeight << "\" stroke=\""
          << kClassColors[static_cast<std::size_t>(std::clamp(c, 0, 3))] << "\" stroke-width=\"1\"/>\n";
    }
    svg << "  </g>\n";
  };
  track(truth, "truth", "label", kMargin);
  track(pred, "pred", "prediction", kMargin + kTrackHeight + kTrackGap);

  // Segment-index axis under the prediction track.
  const double axis_y = kMargin + 2 * kTrackHeight + kTrackGap + 20;
  svg << "  <g class=\"axis\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int k = 0; k <= 4; ++k) {
    const std::size_t idx = from + (to - from) * static_cast<std::size_t>(k) / 4;
    const double x = kMargin + static_cast<double>(idx - from) * step;
    svg << "    <text x=\"" << x << "\" y=\"" << axis_y << "\" text-anchor=\"middle\">" << idx << "</text>\n";
  }
  svg << "    <text x=\"" << kMargin + kPlotWidth / 2 << "\" y=\"" << axis_y + 20
      << "\" text-anchor=\"middle\">segment index</text>\n";
  svg << "  </g>\n";
  svg << "</svg>\n";
  return svg.str();
}

void render_comparison(const LabelVector& truth, const LabelVector& pred, const std::filesystem::path& out,
                       PlotRange range) {
  const auto svg = comparison_svg(truth, pred, range);
  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::Io, "cannot write " + out.string());
  file << svg;
  if (!file) throw Error(ErrorCode::Io, "failed writing " + out.string());
}

}  // namespace diar
