#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace rosetta::utf8 {

inline constexpr char32_t kMaxScalar = 0x10FFFF;

/// Result of decoding one sequence. `length` is always >= 1 for non-empty
/// input; an invalid sequence reports `valid == false` and length 1 so the
/// caller can step over the offending byte.
struct Decoded {
    char32_t codepoint = 0;
    std::size_t length = 0;
    bool valid = false;
};

Decoded decode(std::string_view text, std::size_t pos);

bool is_scalar(long long value) noexcept;

void append(std::string& out, char32_t codepoint);

std::string encode(char32_t codepoint);

/// Number of scalar values; throws InvalidUtf8 on malformed input.
std::size_t length(std::string_view text);

bool valid(std::string_view text);

}  // namespace rosetta::utf8
