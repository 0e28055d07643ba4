#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace musan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed structure notation. `offset` is the byte offset of the problem.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// A song file (canonical or MIDI + annotations) could not be loaded.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// An operation was called with arguments violating its precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Ran out of phrase letters while labeling a structure.
class LabelSpaceError : public Error {
 public:
  using Error::Error;
};

/// A size cap (graph nodes, oracle guard) was exceeded.
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace musan
