#pragma once

#include <stdexcept>
#include <string>

namespace collapsim {

/// Bad or inconsistent run configuration (also used for invalid physics
/// parameters reaching an operation). CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File read/write failure or malformed data file. CLI exit code 3.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Analysis cannot produce a verdict (e.g. coincidence peaks below the
/// significance threshold). CLI exit code 4.
class InconclusiveError : public std::runtime_error {
public:
    explicit InconclusiveError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace collapsim
