#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cshift {

// Error taxonomy. CLI maps these to stable exit codes:
// ConfigError -> 2, I/O and format errors -> 3, NumericsError -> 4.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct WriteError : IoError {
    using IoError::IoError;
};
struct FormatError : IoError {
    using IoError::IoError;
};
struct InvalidMap : IoError {
    using IoError::IoError;
};
struct ShapeError : Error {
    using Error::Error;
};
struct NumericsError : Error {
    using Error::Error;
};

// Locale-independent fixed-point formatting (CSV and SVG output must be
// byte-stable across environments).
inline std::string format_fixed(double v, int decimals = 6) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
    if (res.ec != std::errc()) return "nan";
    return std::string(buf, res.ptr);
}

}  // namespace cshift
