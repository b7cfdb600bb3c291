#pragma once

#include <stdexcept>
#include <string>

namespace sfd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes do not line up for the requested operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on arguments or call order was violated.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A NaN or Inf appeared in a tensor or optimizer state.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Two images that must be pixel-aligned have different sizes.
class RegistrationError : public Error {
 public:
  using Error::Error;
};

class DatasetError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace sfd
