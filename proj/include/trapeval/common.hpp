#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace trapeval {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
    size_t line_no;
    SchemaError(size_t line, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_no(line) {}
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyText : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientNormals : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingSubset : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FatalTransport : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A single failed endpoint call; callers retry these.
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// Strips trailing whitespace per line, converts \r\n to \n, guarantees a
// single trailing newline. Used before hashing so formatting-only variants
// collapse to one fingerprint.
std::string normalize_code(std::string_view code);

} // namespace trapeval
