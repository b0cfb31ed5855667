#pragma once

#include <stdexcept>
#include <string>

namespace sldlab {

enum class ErrorCode {
  InvalidArgument = 1,
  Dimension,
  EmptyDataset,
  InsufficientData,
  Domain,
  Numerical,
  Stepsize,
  Divergence,
  Unsupported,
  InvariantViolation,
  Io,
  Parse,
};

const char* to_string(ErrorCode code) noexcept;

// Single exception type for the core; the C API maps `code()` onto its
// status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sldlab
