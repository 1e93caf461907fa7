#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dictation_rag {

// FNV-1a, 64 bit. Seed replaces the offset basis so two independent
// hash streams can be drawn from the same input.
inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string collapse_whitespace(std::string_view s);

// Lowercases and splits on every non-alphanumeric byte (UTF-8 continuation
// bytes count as separators). Digits kept, empties dropped, no stemming.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace dictation_rag
