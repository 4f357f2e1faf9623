#pragma once

#include <stdexcept>
#include <string>

namespace proptree {

// Base class for all errors raised by the library. The CLI maps these to
// exit code 1; anything else escaping is a bug.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Schema mismatches: unknown columns, level/kind disagreements, bad sidecar files.
class SchemaError : public Error {
  public:
    using Error::Error;
};

// Malformed data values, unparseable cells, domain violations in inputs.
class DataError : public Error {
  public:
    using Error::Error;
};

// Model fitting failures: rank deficiency, separation, degenerate variance.
class FitError : public Error {
  public:
    using Error::Error;
};

// Invalid run configuration (bad flags, inconsistent spec files).
class ConfigError : public Error {
  public:
    using Error::Error;
};

}  // namespace proptree
