#pragma once

#include <stdexcept>
#include <string>

namespace colltrain {

// Each exception maps to one status code of the C API.

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data; the message carries the line number where known.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exact algorithm was asked to run on a graph that has a cycle.
class LoopyGraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace colltrain
