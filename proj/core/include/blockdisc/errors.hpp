#pragma once

#include <stdexcept>
#include <string>

namespace blockdisc {

/// Caller violated an operation's documented precondition (bad n, k, horizon).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed external data: bad characters, truncated packed streams, bad CSV/JSON.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Request exceeds configured resource ceilings (k_max, allocation).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace blockdisc
