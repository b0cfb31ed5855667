#include "sldlab/rng.hpp"

#include <cmath>
#include <numbers>

#include "sldlab/error.hpp"

namespace sldlab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Dimension: return "dimension error";
    case ErrorCode::EmptyDataset: return "empty dataset";
    case ErrorCode::InsufficientData: return "insufficient data";
    case ErrorCode::Domain: return "domain error";
    case ErrorCode::Numerical: return "numerical error";
    case ErrorCode::Stepsize: return "stepsize error";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::InvariantViolation: return "invariant violation";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Parse: return "parse error";
  }
  return "unknown error";
}

double CounterRng::uniform_open_closed() noexcept {
  // 53 random bits mapped to {1, ..., 2^53} * 2^-53.
  return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform_open_closed();
  const double u2 = uniform_open_closed();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

}  // namespace sldlab
