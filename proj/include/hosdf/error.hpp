#pragma once

#include <stdexcept>
#include <string>

namespace hosdf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File or stream failure (missing file, malformed header, short payload).
class IoError : public Error {
public:
  using Error::Error;
};

/// The numerical problem has no answer for this input: no zero crossing,
/// an empty phase, an empty surface.
class NumericalError : public Error {
public:
  using Error::Error;
};

} // namespace hosdf
