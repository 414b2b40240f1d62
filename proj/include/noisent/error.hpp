#pragma once

#include <stdexcept>
#include <string>

namespace noisent {

/// Malformed or unsupported file contents (bad image stream, bad cache header, ...).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem-level failure (missing file, unwritable directory).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Structured-text parse failure carrying the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace noisent
