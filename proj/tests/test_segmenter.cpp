// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <numeric>
#include <vector>

#include "diar/audio_io.hpp"
#include "diar/error.hpp"
#include "diar/segmenter.hpp"

using namespace diar;

namespace {

std::vector<double> ramp(std::size_t n) {
  std::vector<double> x(n);
  std::iota(x.begin(), x.end(), 0.0);
  return x;
}

LabelVector labels_of(std::size_t n) { return {std::vector<int>(n, 0), LabelScheme::Binary, 0.1}; }

}  // namespace

TEST_CASE("segment_channel shapes") {
  CHECK(samples_per_segment(44100, 0.1) == 4410);

  const auto m = segment_channel(std::vector<double>(441000, 0.0), 44100, 0.1);
  CHECK(m.n_segments == 100);
  CHECK(m.samples_per_segment == 4410);
  CHECK(m.data.size() == 441000);

  CHECK(segment_channel(std::vector<double>(4410, 0.0), 44100, 0.1).n_segments == 1);

  const auto x = ramp(10000);
  const auto two = segment_channel(x, 44100, 0.1);
  CHECK(two.n_segments == 2);
  CHECK(two.row(1)[0] == 4410.0);
  CHECK(two.row(1)[4409] == 8819.0);

  CHECK_THROWS_AS(segment_channel(x, 5, 0.1), Error);
  CHECK_THROWS_AS(segment_channel(x, 44100, 0.0), Error);
}

TEST_CASE("segment_channel agrees with a brute-force slicer") {
  const std::size_t w = samples_per_segment(100, 0.1);
  REQUIRE(w == 10);
  for (std::size_t len = 0; len <= 10 * w; ++len) {
    const auto x = ramp(len);
    const auto m = segment_channel(x, 100, 0.1);
    std::vector<std::vector<double>> rows;
    for (std::size_t start = 0; start + w <= len; start += w) rows.emplace_back(x.begin() + start, x.begin() + start + w);
    REQUIRE(m.n_segments == rows.size());
    CHECK(m.n_segments == len / w);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(std::vector<double>(m.row(i).begin(), m.row(i).end()) == rows[i]);
    }
    // Row-major flattening is a prefix of the channel.
    CHECK(std::equal(m.data.begin(), m.data.end(), x.begin()));
  }
}

TEST_CASE("per-row decimation") {
  const auto x = ramp(441000);
  const auto seg = segment_channel(x, 44100, 0.1);
  const auto ds = downsample_segments(seg, 4);
  CHECK(ds.n_segments == 100);
  CHECK(ds.samples_per_segment == 1102);
  CHECK(ds.effective_rate == doctest::Approx(11025.0));
  for (std::size_t i = 0; i < ds.n_segments; ++i) {
    const auto expect = downsample(seg.row(i), 4);
    CHECK(std::vector<double>(ds.row(i).begin(), ds.row(i).end()) == expect);
  }
  CHECK_THROWS_AS(downsample_segments(seg, 0), Error);
}

TEST_CASE("segment-then-decimate equals decimate-then-segment only when w divides evenly") {
  const auto x = ramp(4000);
  // w = 40, rate 4: both orders agree.
  const auto a = downsample_segments(segment_channel(x, 400, 0.1), 4);
  const auto b = segment_channel(downsample(x, 4), 100, 0.1);
  CHECK(a.data == b.data);

  // w = 4410, rate 4: residue of 2 per segment makes the orders differ.
  const auto y = ramp(44100);
  const auto c = downsample_segments(segment_channel(y, 44100, 0.1), 4);
  const auto whole = downsample(y, 4);
  CHECK(c.row(1)[0] == 4410.0);
  CHECK(whole[1102] == 4408.0);
}

TEST_CASE("align truncates to the shorter side") {
  const auto seg = segment_channel(std::vector<double>(1000, 0.0), 100, 0.1);
  REQUIRE(seg.n_segments == 100);
  auto same = align(seg, labels_of(100), "f/ch1");
  CHECK(same.segments.n_segments == 100);
  CHECK(same.labels.size() == 100);
  CHECK(same.source_id == "f/ch1");

  auto fewer_labels = align(seg, labels_of(98));
  CHECK(fewer_labels.segments.n_segments == 98);
  CHECK(fewer_labels.segments.data.size() == 98 * 10);
  CHECK(fewer_labels.labels.size() == 98);

  const auto seg98 = segment_channel(std::vector<double>(980, 0.0), 100, 0.1);
  auto fewer_segments = align(seg98, labels_of(100));
  CHECK(fewer_segments.segments.n_segments == 98);
  CHECK(fewer_segments.labels.size() == 98);

  CHECK_THROWS_AS(align(seg, labels_of(0)), Error);
  CHECK_THROWS_AS(align(SegmentMatrix{}, labels_of(5)), Error);
}
