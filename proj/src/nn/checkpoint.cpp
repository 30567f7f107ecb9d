// SPDX-License-Identifier: Apache-2.0
#include "../binary_io.hpp"
#include "diar/error.hpp"
#include "diar/nn.hpp"

namespace diar::nn {
namespace {

constexpr char kMagic[] = "DKNN";
constexpr std::uint32_t kVersion = 1;

}  // namespace

// Layout: magic, u32 version, u32-length spec text, u32-length metadata
// text (key=value lines), u32 tensor count, then per tensor: u16-length
// name, u32 rank, u32 dims, float64 payload.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint) {
  check_params(checkpoint.spec, checkpoint.params);
  detail::ByteWriter w;
  w.put_bytes({kMagic, 4});
  w.put(kVersion);
  w.put_string<std::uint32_t>(checkpoint.spec.serialize());
  std::string meta;
  for (const auto& [key, value] : checkpoint.metadata) {
    if (key.find_first_of("=\n") != std::string::npos || value.find('\n') != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "checkpoint metadata key/value contains '=' or a newline");
    }
    meta += key + '=' + value + '\n';
  }
  w.put_string<std::uint32_t>(meta);
  w.put(static_cast<std::uint32_t>(checkpoint.params.entries.size()));
  for (const auto& e : checkpoint.params.entries) {
    w.put_string<std::uint16_t>(e.name);
    w.put(static_cast<std::uint32_t>(e.value.dims.size()));
    for (auto d : e.value.dims) w.put(static_cast<std::uint32_t>(d));
    w.put_array(std::span<const double>(e.value.data));
  }
  return std::move(w.bytes());
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "checkpoint");
  if (bytes.size() < 4 || r.get_bytes(4) != std::string_view(kMagic, 4)) {
    throw Error(ErrorCode::Malformed, "checkpoint: bad magic");
  }
  if (const auto version = r.get<std::uint32_t>(); version != kVersion) {
    throw Error(ErrorCode::UnsupportedFormat, "checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint cp;
  cp.spec = ModelSpec::deserialize(r.get_string<std::uint32_t>());
  const auto meta = r.get_string<std::uint32_t>();
  std::size_t start = 0;
  while (start < meta.size()) {
    const auto end = meta.find('\n', start);
    const auto line = std::string_view(meta).substr(start, end - start);
    start = end == std::string::npos ? meta.size() : end + 1;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::Malformed, "checkpoint: bad metadata line");
    cp.metadata.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor e;
    e.name = r.get_string<std::uint16_t>();
    const auto rank = r.get<std::uint32_t>();
    if (rank > 8) throw Error(ErrorCode::Malformed, "checkpoint: implausible tensor rank");
    std::uint64_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      e.value.dims.push_back(r.get<std::uint32_t>());
      n *= e.value.dims.back();
    }
    if (n * sizeof(double) > r.remaining()) {
      throw Error(ErrorCode::Truncated, "checkpoint: tensor '" + e.name + "' payload is truncated");
    }
    e.value.data.resize(n);
    r.get_array(std::span<double>(e.value.data));
    cp.params.entries.push_back(std::move(e));
  }
  if (r.remaining() != 0) throw Error(ErrorCode::Malformed, "checkpoint: trailing bytes");
  check_params(cp.spec, cp.params);
  return cp;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  detail::write_file_atomic(path, encode_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(detail::read_file(path));
}

}  // namespace diar::nn
