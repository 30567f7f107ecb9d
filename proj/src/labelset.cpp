// SPDX-License-Identifier: Apache-2.0
#include "diar/labelset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "diar/error.hpp"
#include "diar/log.hpp"

namespace diar {
namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    fields.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

// Drops every byte of a multi-byte UTF-8 sequence, then trims and uppercases.
std::string canonical_tag(std::string_view s) {
  std::string out;
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && u >= 0x20) out.push_back(static_cast<char>(std::toupper(u)));
  }
  return std::string(trim(out));
}

}  // namespace

IntervalTable parse_label_csv(std::string_view text) {
  // Skip a UTF-8 byte-order mark.
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  IntervalTable table;
  std::array<std::size_t, 4> col{};  // tmin, tier, text, tmax
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t data_row = 0;

  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }

    const auto fields = split_commas(line);
    if (!have_header) {
      constexpr std::array<std::string_view, 4> names{"tmin", "tier", "text", "tmax"};
      for (std::size_t k = 0; k < names.size(); ++k) {
        auto it = std::find_if(fields.begin(), fields.end(), [&](std::string_view f) {
          std::string lower;
          for (char c : trim(f)) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
          return lower == names[k];
        });
        if (it == fields.end()) {
          throw Error(ErrorCode::Malformed, "label header is missing column '" + std::string(names[k]) + "'");
        }
        col[k] = static_cast<std::size_t>(it - fields.begin());
      }
      have_header = true;
      continue;
    }

    ++data_row;
    const std::size_t needed = *std::max_element(col.begin(), col.end()) + 1;
    if (fields.size() < needed) {
      throw Error(ErrorCode::Malformed, "label row " + std::to_string(data_row) + " (line " +
                                            std::to_string(line_no) + ") has too few columns");
    }
    const auto tmin = parse_number(fields[col[0]]);
    const auto tmax = parse_number(fields[col[3]]);
    if (!tmin || !tmax) {
      throw Error(ErrorCode::Malformed, "label row " + std::to_string(data_row) + " (line " +
                                            std::to_string(line_no) + ") has an unparseable time");
    }
    table.rows.push_back({*tmin, std::string(fields[col[1]]), std::string(fields[col[2]]), *tmax});
    if (end == text.size()) break;
  }
  if (!have_header) {
    throw Error(ErrorCode::Malformed, "label file has no header row");
  }
  return table;
}

IntervalTable read_label_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot open " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_label_csv(ss.str());
}

std::string format_label_csv(const IntervalTable& table) {
  std::string out = "tmin,tier,text,tmax\n";
  char buf[64];
  for (const auto& row : table.rows) {
    std::snprintf(buf, sizeof buf, "%.6f", row.tmin);
    out += buf;
    out += ',' + row.tier + ',' + row.text + ',';
    std::snprintf(buf, sizeof buf, "%.6f", row.tmax);
    out += buf;
    out += '\n';
  }
  return out;
}

TierAliases default_tier_aliases() {
  return {
      {"CH1", "CH1"}, {"CH 1", "CH1"}, {"CHANNEL1", "CH1"}, {"CHANNEL 1", "CH1"},
      {"CH2", "CH2"}, {"CH 2", "CH2"}, {"CHANNEL2", "CH2"}, {"CHANNEL 2", "CH2"},
  };
}

CleanResult clean_intervals(const IntervalTable& table, const TierAliases& aliases) {
  CleanResult result;
  std::vector<IntervalRow> rows;
  rows.reserve(table.rows.size());
  for (const auto& raw : table.rows) {
    IntervalRow row = raw;
    const auto tier = canonical_tag(row.tier);
    const auto it = aliases.find(tier);
    if (it == aliases.end()) {
      throw Error(ErrorCode::Malformed, "tier '" + row.tier + "' does not map to CH1 or CH2");
    }
    row.tier = it->second;
    row.text = canonical_tag(row.text);
    if (row.tmin >= row.tmax) {
      ++result.dropped;
      continue;
    }
    rows.push_back(std::move(row));
  }

  const auto by_tmin = [](const IntervalRow& a, const IntervalRow& b) { return a.tmin < b.tmin; };
  std::stable_sort(rows.begin(), rows.end(), by_tmin);

  std::map<std::string, double> last_tmax;
  std::vector<IntervalRow> kept;
  kept.reserve(rows.size());
  for (auto& row : rows) {
    auto [it, fresh] = last_tmax.try_emplace(row.tier, row.tmax);
    if (!fresh) {
      if (row.tmin < it->second) {
        row.tmin = it->second;
        ++result.clamped;
        if (row.tmin >= row.tmax) {
          ++result.dropped;
          continue;
        }
      }
      it->second = row.tmax;
    }
    kept.push_back(std::move(row));
  }
  // Clamping can move a row past its neighbours from the other tier.
  std::stable_sort(kept.begin(), kept.end(), by_tmin);
  result.table.rows = std::move(kept);

  if (result.dropped > 0) {
    log_warning("dropped " + std::to_string(result.dropped) + " empty or inverted label intervals");
  }
  return result;
}

long segment_index(double t, double segment_duration) {
  return static_cast<long>(std::floor((t + 1e-9) / segment_duration));
}

LabelVector intervals_to_labels(const IntervalTable& table, std::string_view tier,
                                std::size_t n_segments, double segment_duration) {
  if (!(segment_duration > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "segment duration must be positive");
  }
  LabelVector labels{std::vector<int>(n_segments, 0), LabelScheme::Binary, segment_duration};
  const long n = static_cast<long>(n_segments);
  for (const auto& row : table.rows) {
    if (row.tier != tier || row.text != kTextSpeech) continue;
    const long lo = std::clamp(segment_index(row.tmin, segment_duration), 0L, n);
    const long hi = std::clamp(segment_index(row.tmax, segment_duration), 0L, n);
    for (long i = lo; i < hi; ++i) {
      labels.classes[static_cast<std::size_t>(i)] = 1;
    }
  }
  return labels;
}

LabelVector merge_four_class(const LabelVector& ch1, const LabelVector& ch2) {
  if (ch1.size() != ch2.size()) {
    throw Error(ErrorCode::ShapeMismatch, "channel label vectors differ in length");
  }
  if (ch1.scheme != LabelScheme::Binary || ch2.scheme != LabelScheme::Binary) {
    throw Error(ErrorCode::InvalidArgument, "four-class merge needs binary inputs");
  }
  LabelVector out{std::vector<int>(ch1.size()), LabelScheme::FourClass, ch1.segment_duration};
  for (std::size_t i = 0; i < ch1.size(); ++i) {
    const int a = ch1.classes[i];
    const int b = ch2.classes[i];
    if ((a != 0 && a != 1) || (b != 0 && b != 1)) {
      throw Error(ErrorCode::InvalidArgument, "four-class merge needs 0/1 entries");
    }
    out.classes[i] = a + 2 * b;
  }
  return out;
}

}  // namespace diar
