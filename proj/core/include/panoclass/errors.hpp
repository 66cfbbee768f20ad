#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace panoclass {

// Base for every error raised by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed capture or CSV input. `offset` is the byte offset of the problem.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnsupportedFormatError : public Error {
 public:
  using Error::Error;
};

class AmbiguousIdentityError : public Error {
 public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class DegenerateLabelsError : public Error {
 public:
  using Error::Error;
};

class InvalidFeatureError : public Error {
 public:
  using Error::Error;
};

class SchemaMismatchError : public Error {
 public:
  using Error::Error;
};

// Corrupt model / threshold document. `location` names where parsing stopped.
class DeserializationError : public Error {
 public:
  DeserializationError(const std::string& what, std::string location)
      : Error(what + " (at " + location + ")"), location_(std::move(location)) {}
  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

class OrderingError : public Error {
 public:
  using Error::Error;
};

class DegenerateSplitError : public Error {
 public:
  using Error::Error;
};

}  // namespace panoclass
