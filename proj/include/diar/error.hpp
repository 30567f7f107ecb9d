// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace diar {

/// Failure categories surfaced by every module. The C API maps these
/// one-to-one onto diar_status values.
enum class ErrorCode : int {
  Usage = 1,          // bad flag, config key, or argument combination
  InvalidArgument,    // precondition violated by a caller-supplied value
  Io,                 // missing file, unwritable path
  UnsupportedFormat,  // well-formed input we do not handle (e.g. 24-bit WAV)
  Truncated,          // file ends before its declared payload
  Malformed,          // syntax error in a CSV, cache, or checkpoint
  SilentChannel,      // loudness of an all-zero or empty channel
  ShapeMismatch,      // tensor, label, or dataset dimensions disagree
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

const char* error_code_name(ErrorCode code) noexcept;

}  // namespace diar
