#pragma once

#include <stdexcept>
#include <string>

namespace msc {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or out-of-range parameter (k, b, q, rate constraints).
struct ParameterError : Error {
  using Error::Error;
};

/// Input data violates an operation's preconditions (negative values in
/// non-negative mode, shape mismatch, non-finite entries).
struct InputError : Error {
  using Error::Error;
};

/// An in-memory payload is internally inconsistent (sentinel count vs. k,
/// mask entries out of range, ...).
struct CorruptPayloadError : Error {
  using Error::Error;
};

enum class WireErrorCode {
  bad_magic,
  unknown_codec,
  bad_header,
  truncated,
  trailing_bytes,
  nonzero_padding,
  sentinel_mismatch,
  value_range,
};

const char* to_string(WireErrorCode code);

/// Wire-format parse/serialize failure carrying a distinct error code.
struct WireError : Error {
  WireErrorCode code;
  WireError(WireErrorCode c, const std::string& msg)
      : Error(std::string(to_string(c)) + ": " + msg), code(c) {}
};

}  // namespace msc
