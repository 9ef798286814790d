#pragma once

#include <stdexcept>
#include <string>

namespace graphite {

// Base of every error raised by the library. The CLI maps any Error to a
// nonzero exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes or model widths.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced by a forward operation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Caller violated an API precondition (non-scalar loss, empty batch, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// A model was asked for something its treatment representation cannot do,
// e.g. predicting a treatment never seen during training without a graph
// encoder.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

class InvalidTreatmentError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Messages carry the file, row and field.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace graphite
