#pragma once

#include <stdexcept>
#include <string>

namespace readability {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (CSV, TSV, JSON, JSONL, checkpoint).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid run or model configuration; the CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace readability
