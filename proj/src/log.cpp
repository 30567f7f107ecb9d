// SPDX-License-Identifier: Apache-2.0
#include "diar/log.hpp"

#include <iostream>
#include <mutex>

#include "diar/error.hpp"

namespace diar {
namespace {

std::mutex g_sink_mutex;
LogSink g_sink;

void emit(LogLevel level, std::string_view message) {
  std::lock_guard lock(g_sink_mutex);
  if (g_sink) {
    g_sink(level, message);
  } else if (level == LogLevel::Warning) {
    std::cerr << "warning: " << message << '\n';
  }
}

}  // namespace

void set_log_sink(LogSink sink) {
  std::lock_guard lock(g_sink_mutex);
  g_sink = std::move(sink);
}

void log_info(std::string_view message) { emit(LogLevel::Info, message); }
void log_warning(std::string_view message) { emit(LogLevel::Warning, message); }

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Usage: return "usage";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Io: return "io";
    case ErrorCode::UnsupportedFormat: return "unsupported format";
    case ErrorCode::Truncated: return "truncated";
    case ErrorCode::Malformed: return "malformed";
    case ErrorCode::SilentChannel: return "silent channel";
    case ErrorCode::ShapeMismatch: return "shape mismatch";
  }
  return "unknown";
}

}  // namespace diar
