#pragma once

#include <stdexcept>
#include <string>

namespace lqrtd {

// Base class for all library errors so callers can catch everything in one go.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonSymmetricError : Error {
  using Error::Error;
};
struct BadLengthError : Error {
  using Error::Error;
};
struct DimMismatchError : Error {
  using Error::Error;
};
struct UnstableError : Error {
  using Error::Error;
};
struct DiscountedUnstableError : Error {
  using Error::Error;
};
struct RateTooSmallError : Error {
  using Error::Error;
};
struct NoConvergenceError : Error {
  using Error::Error;
};
struct UnstabilizableError : Error {
  using Error::Error;
};
struct NotPdError : Error {
  using Error::Error;
};
struct NoSolutionError : Error {
  using Error::Error;
};
struct BadBlockCountError : Error {
  using Error::Error;
};
struct NonFiniteError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct NoStableInstanceError : Error {
  using Error::Error;
};

}  // namespace lqrtd
