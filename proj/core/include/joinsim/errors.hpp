#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace joinsim {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File missing, unreadable, or unwritable.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed on-disk data: arity mismatch, bad header, checksum failure.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// SQL text outside the supported subset. `offset` is a byte position into the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// A name that does not resolve against the catalog or alias registry, or a
/// literal whose type does not match its column.
class BindError : public Error {
 public:
  using Error::Error;
};

/// Size guards (subset limits, enumeration limits, out-of-range arguments).
class LimitError : public Error {
 public:
  using Error::Error;
};

/// Trace lookup of a subset that a partial trace does not contain.
class MissingEntryError : public Error {
 public:
  using Error::Error;
};

/// Environment or evaluation setup that cannot be honoured.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Step with an action whose mask bit is clear.
class InvalidActionError : public Error {
 public:
  using Error::Error;
};

/// An agent broke the select_action contract.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace joinsim
