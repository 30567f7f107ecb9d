// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "diar/audio_io.hpp"
#include "diar/error.hpp"
#include "diar/log.hpp"
#include "test_util.hpp"

using namespace diar;

namespace {

void put_u16(std::string& s, std::uint16_t v) { s.append(reinterpret_cast<const char*>(&v), 2); }
void put_u32(std::string& s, std::uint32_t v) { s.append(reinterpret_cast<const char*>(&v), 4); }

struct RawWav {
  std::uint16_t format = 1;
  std::uint16_t channels = 2;
  std::uint32_t rate = 44100;
  std::uint16_t bits = 16;
  std::vector<std::int16_t> frames;  // interleaved
  std::string extra_chunk;           // written between fmt and data, odd sizes padded
  std::int64_t declared_data = -1;   // overrides the data chunk size
};

// Hand-assembled RIFF bytes, independent of write_wav.
std::string assemble(const RawWav& w) {
  std::string fmt;
  put_u16(fmt, w.format);
  put_u16(fmt, w.channels);
  put_u32(fmt, w.rate);
  put_u32(fmt, w.rate * w.channels * w.bits / 8);
  put_u16(fmt, static_cast<std::uint16_t>(w.channels * w.bits / 8));
  put_u16(fmt, w.bits);

  std::string body = "WAVE";
  body += "fmt ";
  put_u32(body, static_cast<std::uint32_t>(fmt.size()));
  body += fmt;
  if (!w.extra_chunk.empty()) {
    body += "LIST";
    put_u32(body, static_cast<std::uint32_t>(w.extra_chunk.size()));
    body += w.extra_chunk;
    if (w.extra_chunk.size() % 2) body.push_back('\0');
  }
  body += "data";
  const auto bytes = static_cast<std::uint32_t>(w.frames.size() * 2);
  put_u32(body, w.declared_data >= 0 ? static_cast<std::uint32_t>(w.declared_data) : bytes);
  body.append(reinterpret_cast<const char*>(w.frames.data()), bytes);

  std::string out = "RIFF";
  put_u32(out, static_cast<std::uint32_t>(body.size()));
  return out + body;
}

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Stored PCM samples of a file written by write_wav (canonical 44-byte header).
std::vector<std::int16_t> stored_samples(const std::filesystem::path& p) {
  const auto bytes = read_bytes(p);
  const auto data = bytes.find("data");
  REQUIRE(data != std::string::npos);
  std::uint32_t n = 0;
  std::memcpy(&n, bytes.data() + data + 4, 4);
  std::vector<std::int16_t> out(n / 2);
  std::memcpy(out.data(), bytes.data() + data + 8, n);
  return out;
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Usage;
}

double brute_rms(const std::vector<double>& x) {
  long double acc = 0;
  for (double v : x) acc += static_cast<long double>(v) * v;
  return static_cast<double>(std::sqrt(acc / x.size()));
}

std::vector<double> sine(std::size_t n, double periods, double amp = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2 * std::numbers::pi * periods * i / n);
  return x;
}

}  // namespace

TEST_CASE("read_wav decodes silence and scales by 1/32768") {
  test::TempDir dir("audio");
  RawWav w;
  w.frames.assign(2 * 44100, 0);
  write_bytes(dir / "zeros.wav", assemble(w));
  const auto clip = read_wav(dir / "zeros.wav");
  CHECK(clip.sample_rate == 44100);
  REQUIRE(clip.channels.size() == 2);
  CHECK(clip.channels[0].size() == 44100);
  CHECK(std::all_of(clip.channels[1].begin(), clip.channels[1].end(), [](double v) { return v == 0.0; }));

  RawWav one;
  one.channels = 1;
  one.frames = {16384};
  write_bytes(dir / "half.wav", assemble(one));
  const auto half = read_wav(dir / "half.wav");
  REQUIRE(half.channels.size() == 1);
  CHECK(half.channels[0] == std::vector<double>{0.5});
}

TEST_CASE("read_wav deinterleaves channels and skips unknown chunks") {
  test::TempDir dir("audio");
  RawWav w;
  w.frames = {1, -1, 2, -2, 3, -3};
  w.extra_chunk = "odd";  // 3 bytes plus a pad byte
  write_bytes(dir / "x.wav", assemble(w));
  const auto clip = read_wav(dir / "x.wav");
  CHECK(clip.channels[0] == std::vector<double>{1 / 32768.0, 2 / 32768.0, 3 / 32768.0});
  CHECK(clip.channels[1] == std::vector<double>{-1 / 32768.0, -2 / 32768.0, -3 / 32768.0});
}

TEST_CASE("read_wav reports distinct errors") {
  test::TempDir dir("audio");
  CHECK(code_of([&] { read_wav(dir / "missing.wav"); }) == ErrorCode::Io);

  RawWav flt;
  flt.format = 3;
  flt.frames = {0, 0};
  write_bytes(dir / "float.wav", assemble(flt));
  CHECK(code_of([&] { read_wav(dir / "float.wav"); }) == ErrorCode::UnsupportedFormat);

  RawWav deep;
  deep.bits = 24;
  deep.frames = {0, 0, 0};
  write_bytes(dir / "deep.wav", assemble(deep));
  CHECK(code_of([&] { read_wav(dir / "deep.wav"); }) == ErrorCode::UnsupportedFormat);

  RawWav wide;
  wide.channels = 3;
  wide.frames = {0, 0, 0};
  write_bytes(dir / "wide.wav", assemble(wide));
  CHECK(code_of([&] { read_wav(dir / "wide.wav"); }) == ErrorCode::UnsupportedFormat);

  RawWav cut;
  cut.frames = {1, 2, 3, 4};
  cut.declared_data = 100;
  write_bytes(dir / "cut.wav", assemble(cut));
  CHECK(code_of([&] { read_wav(dir / "cut.wav"); }) == ErrorCode::Truncated);

  write_bytes(dir / "text.wav", "hello, this is not audio at all");
  CHECK(code_of([&] { read_wav(dir / "text.wav"); }) == ErrorCode::UnsupportedFormat);
}

TEST_CASE("write_wav stores boundary amplitudes") {
  test::TempDir dir("audio");
  AudioClip clip{44100, {{1.0, 0.0, -1.0, 0.5, 2.0, -3.0}}};
  write_wav(clip, dir / "b.wav");
  CHECK(stored_samples(dir / "b.wav") == std::vector<std::int16_t>{32767, 0, -32768, 16384, 32767, -32768});
}

TEST_CASE("decode(encode(decode(s))) == decode(s) for every 16-bit sample") {
  test::TempDir dir("audio");
  std::vector<double> all;
  for (int s = -32768; s <= 32767; ++s) all.push_back(s / 32768.0);
  write_wav({8000, {all}}, dir / "all.wav");
  const auto back = read_wav(dir / "all.wav");
  CHECK(back.channels[0] == all);
}

TEST_CASE("random clips round-trip within one LSB") {
  test::TempDir dir("audio");
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    AudioClip clip{22050, {Samples(997), Samples(997)}};
    for (auto& ch : clip.channels) for (auto& v : ch) v = u(rng);
    write_wav(clip, dir / "r.wav");
    const auto back = read_wav(dir / "r.wav");
    for (int c = 0; c < 2; ++c) {
      for (std::size_t i = 0; i < 997; ++i) {
        CHECK(std::abs(back.channels[c][i] - clip.channels[c][i]) <= 1.0 / 32768.0);
      }
    }
    write_wav(back, dir / "r2.wav");
    CHECK(read_wav(dir / "r2.wav").channels == back.channels);
    CHECK(read_bytes(dir / "r.wav") == read_bytes(dir / "r2.wav"));
  }
}

TEST_CASE("measure_dbfs") {
  CHECK(measure_dbfs(std::vector<double>(100, 1.0)).dbfs == doctest::Approx(0.0).epsilon(1e-15));
  const auto s = sine(44100, 441);
  CHECK(measure_dbfs(s).dbfs == doctest::Approx(20 * std::log10(brute_rms(s))).epsilon(1e-12));
  CHECK(measure_dbfs(s).dbfs == doctest::Approx(-3.0103).epsilon(1e-4));
  CHECK(code_of([] { measure_dbfs(std::vector<double>(10, 0.0)); }) == ErrorCode::SilentChannel);
  CHECK(code_of([] { measure_dbfs(std::vector<double>{}); }) == ErrorCode::SilentChannel);
}

TEST_CASE("measure_dbfs scales by 20 log10 g") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.5, 0.5), gain(0.01, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(257);
    for (auto& v : x) v = u(rng);
    const double g = gain(rng);
    std::vector<double> y(x);
    for (auto& v : y) v *= g;
    CHECK(std::abs(measure_dbfs(y).dbfs - measure_dbfs(x).dbfs - 20 * std::log10(g)) < 1e-9);
    CHECK(measure_dbfs(x).dbfs <= 0.0);
  }
}

TEST_CASE("normalize_to_dbfs gain formula") {
  AudioClip tenth{100, {std::vector<double>(1000, 0.1)}};
  const auto same = normalize_to_dbfs(tenth, {-20.0});
  for (double v : same.channels[0]) CHECK(v == doctest::Approx(0.1).epsilon(1e-12));

  const auto louder = normalize_to_dbfs(tenth, {-14.0});
  CHECK(louder.channels[0][0] / 0.1 == doctest::Approx(std::pow(10.0, 6.0 / 20.0)).epsilon(1e-12));
  CHECK(louder.channels[0][0] / 0.1 == doctest::Approx(1.9953).epsilon(1e-4));

  const auto s = normalize_to_dbfs({44100, {sine(44100, 441)}}, {-20.0});
  const double peak = *std::max_element(s.channels[0].begin(), s.channels[0].end());
  CHECK(peak == doctest::Approx(0.1413).epsilon(1e-3));
}

TEST_CASE("normalize_to_dbfs hits the target per channel and is idempotent") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  AudioClip clip{16000, {Samples(8000), Samples(8000)}};
  for (auto& v : clip.channels[0]) v = 0.01 * n(rng);
  for (auto& v : clip.channels[1]) v = 0.2 * n(rng);
  const auto once = normalize_to_dbfs(clip, {-20.0});
  for (const auto& ch : once.channels) CHECK(std::abs(measure_dbfs(ch).dbfs + 20.0) < 1e-6);
  const auto twice = normalize_to_dbfs(once, {-20.0});
  for (int c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < 8000; ++i) CHECK(std::abs(twice.channels[c][i] - once.channels[c][i]) < 1e-9);
  }
  CHECK(code_of([&] { normalize_to_dbfs({16000, {Samples(10, 0.3), Samples(10, 0.0)}}, {-20.0}); }) ==
        ErrorCode::SilentChannel);
}

TEST_CASE("normalize_to_dbfs clamps with a warning") {
  std::vector<std::string> warnings;
  set_log_sink([&](LogLevel level, std::string_view msg) {
    if (level == LogLevel::Warning) warnings.emplace_back(msg);
  });
  Samples spiky(100, 0.001);
  spiky[0] = 0.9;
  const auto out = normalize_to_dbfs({100, {spiky}}, {-3.0});
  set_log_sink({});
  CHECK(out.channels[0][0] == 1.0);
  for (double v : out.channels[0]) CHECK(std::abs(v) <= 1.0);
  CHECK(warnings.size() == 1);
}

TEST_CASE("downsample keeps every rate-th sample and drops the residue") {
  CHECK(downsample(std::vector<double>(4410, 0.0), 4).size() == 1102);
  const std::vector<double> abc{1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK(downsample(abc, 4) == std::vector<double>{1, 5});
  CHECK(downsample(abc, 1) == abc);
  CHECK(code_of([&] { downsample(abc, 0); }) == ErrorCode::InvalidArgument);

  for (std::size_t rate = 1; rate <= 8; ++rate) {
    for (std::size_t len = 0; len <= 100; ++len) {
      std::vector<double> x(len);
      for (std::size_t i = 0; i < len; ++i) x[i] = static_cast<double>(i) * 1.5;
      std::vector<double> expect;
      for (std::size_t g = 0; (g + 1) * rate <= len; ++g) expect.push_back(x[g * rate]);
      CHECK(downsample(x, rate) == expect);
    }
  }
}
