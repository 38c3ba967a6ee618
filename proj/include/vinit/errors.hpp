#pragma once

#include <stdexcept>
#include <string>

namespace vinit {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonPositiveDepth : Error {
  using Error::Error;
};

struct NonPositiveInverseDepth : Error {
  using Error::Error;
};

struct EmptySegment : Error {
  using Error::Error;
};

struct NonMonotonicTimestamps : Error {
  using Error::Error;
};

struct OutOfBounds : Error {
  using Error::Error;
};

struct NumericalFailure : Error {
  using Error::Error;
};

struct RankDeficient : Error {
  using Error::Error;
};

struct DegenerateGeometry : Error {
  using Error::Error;
};

struct InvalidScenario : Error {
  using Error::Error;
};

struct MissingDepthMap : Error {
  using Error::Error;
};

struct CalibrationParseError : Error {
  using Error::Error;
};

struct ConfigParseError : Error {
  using Error::Error;
};

struct DatasetParseError : Error {
  using Error::Error;
};

struct WindowOutOfRange : Error {
  using Error::Error;
};

}  // namespace vinit
