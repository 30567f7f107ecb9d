// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace diar {

/// One annotated interval: `text` is the activity tag (S = speech,
/// N = non-speech) of channel `tier` between tmin and tmax seconds.
struct IntervalRow {
  double tmin = 0.0;
  std::string tier;
  std::string text;
  double tmax = 0.0;

  bool operator==(const IntervalRow&) const = default;
};

struct IntervalTable {
  std::vector<IntervalRow> rows;

  bool operator==(const IntervalTable&) const = default;
};

enum class LabelScheme { Binary, FourClass };

/// Per-segment classes. Binary: 0 non-speech, 1 speech of this channel's
/// speaker. FourClass: 0 none, 1 speaker 1, 2 speaker 2, 3 overlap.
struct LabelVector {
  std::vector<int> classes;
  LabelScheme scheme = LabelScheme::Binary;
  double segment_duration = 0.1;

  std::size_t size() const { return classes.size(); }
};

inline constexpr std::string_view kTierCh1 = "CH1";
inline constexpr std::string_view kTierCh2 = "CH2";
inline constexpr std::string_view kTextSpeech = "S";
inline constexpr std::string_view kTextNonSpeech = "N";

/// Parses a comma-separated table whose header names tmin, tier, text and
/// tmax in any order. Extra columns are ignored; blank lines are skipped.
IntervalTable parse_label_csv(std::string_view text);

IntervalTable read_label_csv(const std::string& path);

/// Serializes in the header order tmin,tier,text,tmax with six decimals.
std::string format_label_csv(const IntervalTable& table);

/// Maps cleaned (trimmed, uppercased, ASCII-only) tier spellings onto
/// CH1/CH2.
using TierAliases = std::map<std::string, std::string, std::less<>>;

TierAliases default_tier_aliases();

struct CleanResult {
  IntervalTable table;
  std::size_t dropped = 0;  // rows with tmin >= tmax, before or after repair
  std::size_t clamped = 0;  // rows whose tmin was moved to the previous tmax
};

/// Normalizes tier/text spellings, drops empty or inverted intervals and
/// repairs overlaps within a tier by clamping the later row's tmin.
/// Idempotent. Throws if a tier cannot be mapped to CH1/CH2.
CleanResult clean_intervals(const IntervalTable& table,
                            const TierAliases& aliases = default_tier_aliases());

/// floor((t + 1e-9) / segment_duration): the segment index containing t.
long segment_index(double t, double segment_duration);

/// Marks [floor(tmin/d), floor(tmax/d)) as speech for every S row of
/// `tier`, clipped to [0, n_segments).
LabelVector intervals_to_labels(const IntervalTable& table, std::string_view tier,
                                std::size_t n_segments, double segment_duration);

/// Combines two binary channel vectors into the four-class scheme:
/// class = a + 2*b.
LabelVector merge_four_class(const LabelVector& ch1, const LabelVector& ch2);

}  // namespace diar
