#pragma once

#include <stdexcept>
#include <string>

namespace efem {

enum class ErrorCode {
  invalid_argument,
  parse,
  orientation,
  config,
  incompatible,
  singular_system,
  singular_enrichment,
  not_converged,
  io,
  outside_domain,
};

/// Single exception type for the core library; the code drives C API status mapping.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace efem
