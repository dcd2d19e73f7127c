#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace eiprobe {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Non-finite input or an empty distribution.
class DomainError : public Error {
public:
  using Error::Error;
};

// Shape mismatch between matrices, vectors or layers.
class DimensionError : public Error {
public:
  using Error::Error;
};

// Joint-state key space larger than the key type can address.
class CapacityError : public Error {
public:
  using Error::Error;
};

// Invalid experiment / CLI configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

class EmptyDataError : public Error {
public:
  using Error::Error;
};

// Malformed input file. `offset` is the byte offset (binary formats) or the
// 1-based line number (text formats) where parsing failed.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

private:
  std::uint64_t offset_;
};

class UnsupportedVersionError : public Error {
public:
  using Error::Error;
};

// A file could not be opened or written.
class IoError : public Error {
public:
  using Error::Error;
};

} // namespace eiprobe
