#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace lowlat {

using Complex = std::complex<double>;
using Signal = std::vector<double>;
/// Channel-major multichannel signal: `signal[p][n]`.
using MultiSignal = std::vector<Signal>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, configuration or user input. The CLI maps this to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unsupported file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// External estimator misbehaved (bad framing, early exit, timeout).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Internal numerical state can no longer be trusted.
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace lowlat
