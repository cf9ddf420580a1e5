#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace asap {

/* Base class for all errors raised by the library. */
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/* Formula text rejected; `pos` is the byte offset into the input. */
struct SyntaxError : Error {
  std::size_t pos;
  SyntaxError(const std::string& msg, std::size_t pos_)
      : Error(msg + " (at column " + std::to_string(pos_) + ")"), pos(pos_) {}
};

/* Arithmetic left the function domain (division by zero, sqrt of a
 * negative), reported instead of silently producing NaN. */
struct DomainError : Error {
  using Error::Error;
};

/* A temporal window lies entirely past the end of the trace. */
struct HorizonError : Error {
  using Error::Error;
};

struct DimensionError : Error {
  using Error::Error;
};

/* Run-configuration problem; `key` is the dotted section.key path. */
struct ConfigError : Error {
  std::string key;
  ConfigError(const std::string& key_, const std::string& msg)
      : Error("config key '" + key_ + "': " + msg), key(key_) {}
};

/* Simulated dynamics produced a non-finite state. */
struct DivergedError : Error {
  using Error::Error;
};

} // namespace asap
