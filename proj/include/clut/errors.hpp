#pragma once

#include <stdexcept>
#include <string>

namespace clut {

// Bad arguments to a library call: shape mismatch, out-of-contract values.
class InvalidArgument : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed text or binary input (.cube files, manifests, checkpoints).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    ParseError(const std::string& source, long line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what) {}
};

// Invalid run configuration or unusable backend.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dataset-level problems: missing directories, unmatched pairs, unreadable files.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem failures while reading or writing artifacts.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace clut
