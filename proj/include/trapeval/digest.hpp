#pragma once

#include <string>
#include <string_view>

namespace trapeval {

// Lowercase hex sha256.
std::string sha256_hex(std::string_view data);

} // namespace trapeval
