#include "rosetta/utf8.hpp"

#include "rosetta/errors.hpp"

namespace rosetta::utf8 {

Decoded decode(std::string_view text, std::size_t pos) {
    if (pos >= text.size()) return {};
    const auto lead = static_cast<unsigned char>(text[pos]);
    if (lead < 0x80) return {lead, 1, true};

    std::size_t need = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((lead & 0xE0) == 0xC0) {
        need = 1, cp = lead & 0x1F, min = 0x80;
    } else if ((lead & 0xF0) == 0xE0) {
        need = 2, cp = lead & 0x0F, min = 0x800;
    } else if ((lead & 0xF8) == 0xF0) {
        need = 3, cp = lead & 0x07, min = 0x10000;
    } else {
        return {lead, 1, false};
    }
    if (pos + need >= text.size()) return {lead, 1, false};
    for (std::size_t i = 1; i <= need; ++i) {
        const auto c = static_cast<unsigned char>(text[pos + i]);
        if ((c & 0xC0) != 0x80) return {lead, 1, false};
        cp = (cp << 6) | (c & 0x3F);
    }
    // Overlong forms and surrogates are not scalar values.
    if (cp < min || !is_scalar(cp)) return {lead, 1, false};
    return {cp, need + 1, true};
}

bool is_scalar(long long value) noexcept {
    return value >= 0 && value <= static_cast<long long>(kMaxScalar) &&
           !(value >= 0xD800 && value <= 0xDFFF);
}

void append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string encode(char32_t codepoint) {
    std::string out;
    append(out, codepoint);
    return out;
}

std::size_t length(std::string_view text) {
    std::size_t n = 0;
    for (std::size_t pos = 0; pos < text.size();) {
        const auto d = decode(text, pos);
        if (!d.valid) throw InvalidUtf8(pos);
        pos += d.length;
        ++n;
    }
    return n;
}

bool valid(std::string_view text) {
    for (std::size_t pos = 0; pos < text.size();) {
        const auto d = decode(text, pos);
        if (!d.valid) return false;
        pos += d.length;
    }
    return true;
}

}  // namespace rosetta::utf8
