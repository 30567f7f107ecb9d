// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "diar/error.hpp"
#include "diar/features.hpp"
#include "test_util.hpp"

using namespace diar;

namespace {

constexpr double kRate = 11025.0;

// Symmetric Tukey over m points, then drop the last to make it periodic.
std::vector<double> tukey_oracle(std::size_t n, double alpha) {
  const std::size_t m = n + 1;
  const double span = alpha * static_cast<double>(m - 1) / 2.0;
  std::vector<double> w(m, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = static_cast<double>(i);
    const double y = static_cast<double>(m - 1 - i);
    if (x < span) w[i] = 0.5 * (1 + std::cos(std::numbers::pi * (x / span - 1)));
    else if (y < span) w[i] = 0.5 * (1 + std::cos(std::numbers::pi * (y / span - 1)));
  }
  w.pop_back();
  return w;
}

// One-sided PSD of one frame by a direct O(N^2) DFT.
std::vector<double> dft_psd(const double* frame, const std::vector<double>& w, double rate) {
  const std::size_t n = w.size();
  double s2 = 0;
  for (double v : w) s2 += v * v;
  std::vector<double> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0;
    for (std::size_t j = 0; j < n; ++j) {
      acc += w[j] * frame[j] * std::polar(1.0, -2 * std::numbers::pi * static_cast<double>(k * j) / n);
    }
    const double scale = (k == 0 || k == n / 2) ? 1.0 : 2.0;
    out[k] = scale * std::norm(acc) / (rate * s2);
  }
  return out;
}

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 0.1);
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

FeatureArray random_array(std::mt19937_64& rng, std::uint32_t n) {
  std::uniform_real_distribution<float> u(-1e3f, 1e3f);
  FeatureArray a;
  a.dims = {n, 129, 4};
  a.values.resize(std::size_t{n} * 129 * 4);
  for (auto& v : a.values) v = u(rng);
  return a;
}

}  // namespace

TEST_CASE("window matches the periodic Tukey definition") {
  const auto w = make_window({});
  const auto oracle = tukey_oracle(256, 0.25);
  REQUIRE(w.size() == 256);
  for (std::size_t i = 0; i < 256; ++i) CHECK(w[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
  // Reference points of the same window from an established DSP library.
  CHECK(w[0] == 0.0);
  CHECK(w[1] == doctest::Approx(0.002407636663901591).epsilon(1e-12));
  CHECK(w[5] == doctest::Approx(0.05903936782582253).epsilon(1e-12));
  CHECK(w[16] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w[31] == doctest::Approx(0.9975923633360985).epsilon(1e-12));
  CHECK(w[128] == 1.0);
  CHECK(w[250] == doctest::Approx(0.08426519384872733).epsilon(1e-12));
  CHECK(w[255] == doctest::Approx(0.002407636663901591).epsilon(1e-12));
}

TEST_CASE("spectrogram shape laws") {
  const auto s = spectrogram(noise(1102, 1), kRate);
  CHECK(s.height == 129);
  CHECK(s.width == 4);
  CHECK(s.magnitudes.size() == 129 * 4);
  CHECK(s.bin_hz == doctest::Approx(kRate / 256));
  for (double v : s.magnitudes) CHECK(v >= 0.0);

  StftParams p;
  for (std::size_t len = 256; len <= 2000; len += 37) {
    CHECK(spectrogram(noise(len, len), kRate).width == 1 + (len - 256) / 224);
    CHECK(p.frames(len) == 1 + (len - 256) / 224);
  }
  CHECK_THROWS_AS(spectrogram(noise(255, 2), kRate), Error);

  const auto zero = spectrogram(std::vector<double>(1102, 0.0), kRate);
  for (double v : zero.magnitudes) CHECK(v == 0.0);
}

TEST_CASE("spectrogram equals a direct DFT per frame") {
  const auto x = noise(1102, 9);
  const auto s = spectrogram(x, kRate);
  const auto w = tukey_oracle(256, 0.25);
  for (std::size_t f = 0; f < 4; ++f) {
    const auto psd = dft_psd(x.data() + f * 224, w, kRate);
    for (std::size_t k = 0; k < 129; ++k) CHECK(s.at(k, f) == doctest::Approx(psd[k]).epsilon(1e-9));
  }
}

TEST_CASE("bin-centre sine peaks in its bin") {
  for (std::size_t k : {3u, 10u, 40u, 100u, 127u}) {
    std::vector<double> x(1102);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * std::numbers::pi * k * i / 256.0);
    const auto s = spectrogram(x, kRate);
    for (std::size_t f = 0; f < s.width; ++f) {
      std::size_t best = 0;
      for (std::size_t b = 1; b < s.height; ++b) if (s.at(b, f) > s.at(best, f)) best = b;
      CHECK(best == k);
    }
  }
}

TEST_CASE("Parseval: one frame's power matches the windowed signal") {
  const auto x = noise(256, 4);
  const auto s = spectrogram(x, kRate);
  const auto w = tukey_oracle(256, 0.25);
  double s2 = 0, windowed = 0;
  for (std::size_t i = 0; i < 256; ++i) {
    s2 += w[i] * w[i];
    windowed += (w[i] * x[i]) * (w[i] * x[i]);
  }
  double total = 0;
  for (double v : s.magnitudes) total += v;
  CHECK(total * kRate * s2 / 256.0 == doctest::Approx(windowed).epsilon(0.01));
}

TEST_CASE("power scales with the square of the gain") {
  const auto x = noise(1102, 5);
  for (double g : {0.01, 0.5, 3.0}) {
    std::vector<double> y(x);
    for (auto& v : y) v *= g;
    const auto a = spectrogram(x, kRate);
    const auto b = spectrogram(y, kRate);
    for (std::size_t i = 0; i < a.magnitudes.size(); ++i) {
      CHECK(b.magnitudes[i] == doctest::Approx(g * g * a.magnitudes[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("log power option") {
  const auto x = noise(1102, 6);
  StftParams logp;
  logp.log_power = true;
  const auto a = spectrogram(x, kRate);
  const auto b = spectrogram(x, kRate, logp);
  for (std::size_t i = 0; i < a.magnitudes.size(); ++i) {
    CHECK(b.magnitudes[i] == doctest::Approx(10 * std::log10(a.magnitudes[i] + 1e-12)).epsilon(1e-12));
  }
}

TEST_CASE("spectrogram_stack stacks per-row spectrograms") {
  const auto x = noise(3 * 1102, 7);
  const auto stack = spectrogram_stack(x, 1102, kRate);
  CHECK(stack.dims == std::array<std::uint32_t, 3>{3, 129, 4});
  for (std::size_t r = 0; r < 3; ++r) {
    const auto s = spectrogram(std::span<const double>(x).subspan(r * 1102, 1102), kRate);
    for (std::size_t i = 0; i < 129 * 4; ++i) {
      CHECK(stack.values[r * 516 + i] == static_cast<float>(s.magnitudes[i]));
    }
  }
  CHECK_THROWS_AS(spectrogram_stack(noise(1103, 1), 1102, kRate), Error);
}

TEST_CASE("feature cache round-trips bit-exactly") {
  FeatureCache empty;
  CHECK(decode_cache(encode_cache(empty)) == empty);

  FeatureCache zeros;
  zeros.entries["a/ch1"] = FeatureArray{{1, 129, 4}, std::vector<float>(516, 0.0f)};
  CHECK(decode_cache(encode_cache(zeros)) == zeros);

  std::mt19937_64 rng(12);
  FeatureCache c;
  c.params.log_power = true;
  c.entries["file_001/ch1"] = random_array(rng, 5);
  c.entries["file_001/ch2"] = random_array(rng, 2);
  c.entries["b\xC3\xA9"] = random_array(rng, 1);
  const auto bytes = encode_cache(c);
  const auto back = decode_cache(bytes);
  CHECK(back == c);
  CHECK(encode_cache(back) == bytes);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "DKFC");

  test::TempDir dir("features");
  cache_write(c, dir / "f.dkfc");
  CHECK(cache_read(dir / "f.dkfc") == c);
  CHECK(std::filesystem::file_size(dir / "f.dkfc") == bytes.size());
}

TEST_CASE("feature cache rejects damaged files") {
  std::mt19937_64 rng(13);
  FeatureCache c;
  c.entries["x"] = random_array(rng, 2);
  const auto bytes = encode_cache(c);

  auto code = [](std::vector<std::uint8_t> b) {
    try {
      decode_cache(b);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Usage;
  };
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK(code(bad_magic) == ErrorCode::Malformed);
  auto bad_version = bytes;
  bad_version[4] = 9;
  CHECK(code(bad_version) == ErrorCode::UnsupportedFormat);
  CHECK(code({bytes.begin(), bytes.end() - 5}) == ErrorCode::Truncated);
  CHECK(code({bytes.begin(), bytes.begin() + 10}) == ErrorCode::Truncated);
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK(code(trailing) == ErrorCode::Malformed);
}

TEST_CASE("cache_merge requires matching parameters and distinct ids") {
  std::mt19937_64 rng(14);
  FeatureCache a, b, other;
  a.entries["1"] = random_array(rng, 1);
  b.entries["2"] = random_array(rng, 1);
  cache_merge(a, b);
  CHECK(a.entries.size() == 2);
  CHECK_THROWS_AS(cache_merge(a, b), Error);
  other.params.hop = 128;
  other.entries["3"] = random_array(rng, 1);
  CHECK_THROWS_AS(cache_merge(a, other), Error);
}

TEST_CASE("spectrogram agrees with reference values from an established DSP library") {
  std::vector<double> x(1102);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.1 * i) + 0.3 * std::cos(0.7 * i);
  const auto s = spectrogram(x, kRate);
  CHECK(s.at(0, 0) == doctest::Approx(5.225178823307552e-06).epsilon(1e-8));
  CHECK(s.at(4, 0) == doctest::Approx(0.010444435645117522).epsilon(1e-8));
  CHECK(s.at(4, 3) == doctest::Approx(0.010329085635406274).epsilon(1e-8));
  CHECK(s.at(28, 1) == doctest::Approx(0.00045088869331791223).epsilon(1e-8));
  CHECK(s.at(60, 2) == doctest::Approx(2.896059448782819e-11).epsilon(1e-6));
  CHECK(s.at(128, 2) < 1e-15);
}
