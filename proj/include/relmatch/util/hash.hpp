#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace relmatch::util {

/// Hex-encoded SHA-256 of an arbitrary byte string.
std::string sha256_hex(std::string_view data);

/// FNV-1a 64-bit. Stable across platforms, used to seed per-text RNG streams.
constexpr std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace relmatch::util
