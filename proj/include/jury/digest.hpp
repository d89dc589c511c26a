/// @file digest.hpp
/// @brief Stable content digests for prompt payloads and cache keys.

#pragma once

#include <string>
#include <string_view>

namespace jury {

/// SHA-256 of `data`, lowercase hex. Stable across runs and platforms.
std::string sha256_hex(std::string_view data);

}  // namespace jury
