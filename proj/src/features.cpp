// SPDX-License-Identifier: Apache-2.0
#include "diar/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "binary_io.hpp"
#include "diar/error.hpp"

namespace diar {
namespace {

constexpr char kCacheMagic[] = "DKFC";
constexpr std::uint32_t kCacheVersion = 1;
constexpr std::uint32_t kLogPowerFlag = 0x100;

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

// Real-to-complex plan of the given size. Planning is not thread-safe in
// FFTW, execution on fresh fftw_malloc buffers is.
fftw_plan r2c_plan(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, fftw_plan> plans;
  const std::lock_guard lock(mutex);
  auto it = plans.find(n);
  if (it == plans.end()) {
    std::unique_ptr<double, FftwDeleter> in(fftw_alloc_real(n));
    std::unique_ptr<fftw_complex, FftwDeleter> out(fftw_alloc_complex(n / 2 + 1));
    it = plans.emplace(n, fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE)).first;
  }
  return it->second;
}

void check_params(const StftParams& p) {
  if (p.window == 0 || p.hop == 0 || p.fft_size < p.window || !std::has_single_bit(p.fft_size)) {
    throw Error(ErrorCode::InvalidArgument, "invalid STFT parameters");
  }
  if (p.kind != WindowKind::Tukey25) {
    throw Error(ErrorCode::UnsupportedFormat, "unknown window kind");
  }
}

std::uint32_t kind_code(const StftParams& p) {
  return static_cast<std::uint32_t>(p.kind) | (p.log_power ? kLogPowerFlag : 0u);
}

}  // namespace

std::vector<double> make_window(const StftParams& params) {
  check_params(params);
  // Periodic Tukey: the symmetric window of length N+1 with its last
  // sample dropped.
  constexpr double alpha = 0.25;
  const std::size_t m = params.window + 1;
  const double denom = static_cast<double>(m - 1);
  const auto width = static_cast<std::size_t>(std::floor(alpha * denom / 2.0));
  std::vector<double> w(params.window, 1.0);
  for (std::size_t n = 0; n < params.window; ++n) {
    const double x = static_cast<double>(n);
    if (n <= width) {
      w[n] = 0.5 * (1.0 + std::cos(std::numbers::pi * (-1.0 + 2.0 * x / alpha / denom)));
    } else if (n >= m - width - 1) {
      w[n] = 0.5 * (1.0 + std::cos(std::numbers::pi * (-2.0 / alpha + 1.0 + 2.0 * x / alpha / denom)));
    }
  }
  return w;
}

Spectrogram spectrogram(std::span<const double> segment, double sample_rate, const StftParams& params) {
  check_params(params);
  if (segment.size() < params.window) {
    throw Error(ErrorCode::InvalidArgument, "segment of " + std::to_string(segment.size()) +
                                                " samples is shorter than the " +
                                                std::to_string(params.window) + "-sample window");
  }
  if (!(sample_rate > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  }
  const auto window = make_window(params);
  double window_power = 0.0;
  for (double w : window) window_power += w * w;
  // One-sided power spectral density.
  const double scale = 1.0 / (sample_rate * window_power);

  Spectrogram s;
  s.height = params.height();
  s.width = params.frames(segment.size());
  s.bin_hz = sample_rate / params.fft_size;
  s.magnitudes.assign(s.height * s.width, 0.0);

  const fftw_plan plan = r2c_plan(params.fft_size);
  std::unique_ptr<double, FftwDeleter> in(fftw_alloc_real(params.fft_size));
  std::unique_ptr<fftw_complex, FftwDeleter> out(fftw_alloc_complex(s.height));
  for (std::size_t f = 0; f < s.width; ++f) {
    std::fill_n(in.get(), params.fft_size, 0.0);
    for (std::size_t n = 0; n < params.window; ++n) {
      in.get()[n] = segment[f * params.hop + n] * window[n];
    }
    fftw_execute_dft_r2c(plan, in.get(), out.get());
    for (std::size_t k = 0; k < s.height; ++k) {
      const double re = out.get()[k][0];
      const double im = out.get()[k][1];
      double p = (re * re + im * im) * scale;
      if (k != 0 && k != params.fft_size / 2) p *= 2.0;
      if (params.log_power) p = 10.0 * std::log10(p + 1e-12);
      s.magnitudes[k * s.width + f] = p;
    }
  }
  return s;
}

FeatureArray spectrogram_stack(std::span<const double> rows, std::size_t row_width, double sample_rate,
                               const StftParams& params) {
  if (row_width == 0 || rows.size() % row_width != 0) {
    throw Error(ErrorCode::ShapeMismatch, "segment rows are not a whole number of rows");
  }
  const std::size_t n = rows.size() / row_width;
  FeatureArray out;
  out.dims = {static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(params.height()),
              static_cast<std::uint32_t>(params.frames(row_width))};
  out.values.reserve(n * out.dims[1] * out.dims[2]);
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = spectrogram(rows.subspan(i * row_width, row_width), sample_rate, params);
    for (double v : s.magnitudes) out.values.push_back(static_cast<float>(v));
  }
  return out;
}

void cache_merge(FeatureCache& into, const FeatureCache& other) {
  if (!(into.params == other.params)) {
    throw Error(ErrorCode::InvalidArgument, "cannot merge feature caches with different STFT parameters");
  }
  for (const auto& [id, array] : other.entries) {
    if (!into.entries.emplace(id, array).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate feature cache entry '" + id + "'");
    }
  }
}

std::vector<std::uint8_t> encode_cache(const FeatureCache& cache) {
  detail::ByteWriter w;
  w.put_bytes({kCacheMagic, 4});
  w.put(kCacheVersion);
  w.put(cache.params.window);
  w.put(cache.params.hop);
  w.put(cache.params.fft_size);
  w.put(kind_code(cache.params));
  w.put(static_cast<std::uint32_t>(cache.entries.size()));
  for (const auto& [id, array] : cache.entries) {
    if (std::size_t{array.dims[0]} * array.dims[1] * array.dims[2] != array.values.size()) {
      throw Error(ErrorCode::ShapeMismatch, "feature entry '" + id + "' dims disagree with its payload");
    }
    w.put_string<std::uint16_t>(id);
    for (auto d : array.dims) w.put(d);
    w.put_array(std::span<const float>(array.values));
  }
  return std::move(w.bytes());
}

FeatureCache decode_cache(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "feature cache");
  if (bytes.size() < 4 || r.get_bytes(4) != std::string_view(kCacheMagic, 4)) {
    throw Error(ErrorCode::Malformed, "feature cache: bad magic");
  }
  if (const auto version = r.get<std::uint32_t>(); version != kCacheVersion) {
    throw Error(ErrorCode::UnsupportedFormat, "feature cache: unsupported version " + std::to_string(version));
  }
  FeatureCache cache;
  cache.params.window = r.get<std::uint32_t>();
  cache.params.hop = r.get<std::uint32_t>();
  cache.params.fft_size = r.get<std::uint32_t>();
  const auto code = r.get<std::uint32_t>();
  cache.params.kind = static_cast<WindowKind>(code & 0xFF);
  cache.params.log_power = (code & kLogPowerFlag) != 0;
  if ((code & ~(kLogPowerFlag | 0xFFu)) != 0) {
    throw Error(ErrorCode::Malformed, "feature cache: unknown window kind code");
  }
  check_params(cache.params);
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t e = 0; e < count; ++e) {
    auto id = r.get_string<std::uint16_t>();
    FeatureArray array;
    for (auto& d : array.dims) d = r.get<std::uint32_t>();
    const std::uint64_t n = std::uint64_t{array.dims[0]} * array.dims[1] * array.dims[2];
    if (n * sizeof(float) > r.remaining()) {
      throw Error(ErrorCode::Truncated, "feature cache: entry '" + id + "' payload is truncated");
    }
    array.values.resize(n);
    r.get_array(std::span<float>(array.values));
    if (!cache.entries.emplace(std::move(id), std::move(array)).second) {
      throw Error(ErrorCode::Malformed, "feature cache: duplicate entry id");
    }
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::Malformed, "feature cache: trailing bytes");
  }
  return cache;
}

void cache_write(const FeatureCache& cache, const std::filesystem::path& path) {
  detail::write_file_atomic(path, encode_cache(cache));
}

FeatureCache cache_read(const std::filesystem::path& path) {
  return decode_cache(detail::read_file(path));
}

}  // namespace diar
