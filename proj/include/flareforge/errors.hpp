#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flareforge {

enum class ErrorKind {
  io,
  format,
  value,
  dimension,
  config,
  empty_flare,
  bounds,
  empty_region,
  pairing,
  missing_depth,
  usage,
};

// Stable identifier used in machine-readable error output ("IOError", ...).
std::string_view error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace flareforge
