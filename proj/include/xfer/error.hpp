#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xfer {

// Caller passed arguments that can never be valid (bad flags, empty splits,
// out-of-range hyperparameters).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data is malformed or inconsistent (labels, files, caches).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Layer or tensor shapes do not line up.
class ShapeError : public DataError {
 public:
  using DataError::DataError;
};

// A byte stream failed to decode. `offset` is where decoding stopped.
class DecodeError : public DataError {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : DataError(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// A bottleneck cache does not belong to the network prefix it is used with.
class StaleCacheError : public DataError {
 public:
  using DataError::DataError;
};

// NaN or Inf showed up where finite values are required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// API misuse by the program itself (mismatched caches, gradient shapes).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace xfer
