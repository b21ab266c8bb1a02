// errors.hpp
// Exception types shared across the toolkit.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace locq {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Conditioning on an outcome whose probability is below the 1e-14 cutoff.
struct ZeroProbabilityOutcome : Error {
  using Error::Error;
};

struct NonUnitaryGate : Error {
  using Error::Error;
};

struct TooLargeToEnumerate : Error {
  using Error::Error;
};

struct UnsupportedSize : Error {
  using Error::Error;
};

struct SizeMismatch : Error {
  using Error::Error;
};

struct LengthMismatch : Error {
  using Error::Error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

struct InvalidProbability : Error {
  using Error::Error;
};

// The certification gap (LQ or a bound-derived Delta) is not positive.
// `pair_index` identifies the failing pair in multi-pair runs, -1 otherwise.
struct ZeroGap : Error {
  explicit ZeroGap(const std::string& what, int pair = -1)
      : Error(what), pair_index(pair) {}
  int pair_index = -1;
};

struct GeometryInvalid : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace locq
