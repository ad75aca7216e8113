#pragma once

#include <string>
#include <string_view>

#include "persum/util/error.hpp"

// Character offsets throughout the toolkit are Unicode code points.
namespace persum::utf8 {

inline std::u32string decode(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        char32_t cp = 0;
        std::size_t extra = 0;
        if (c < 0x80) {
            cp = c;
        } else if ((c >> 5) == 0x6) {
            cp = c & 0x1F;
            extra = 1;
        } else if ((c >> 4) == 0xE) {
            cp = c & 0x0F;
            extra = 2;
        } else if ((c >> 3) == 0x1E) {
            cp = c & 0x07;
            extra = 3;
        } else {
            throw ParseError("invalid UTF-8 lead byte at offset " + std::to_string(i));
        }
        for (std::size_t k = 1; k <= extra; ++k) {
            if (i + k >= s.size()) throw ParseError("truncated UTF-8 sequence at offset " + std::to_string(i));
            auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc >> 6) != 0x2) throw ParseError("invalid UTF-8 continuation at offset " + std::to_string(i + k));
            cp = (cp << 6) | (cc & 0x3F);
        }
        out.push_back(cp);
        i += extra + 1;
    }
    return out;
}

inline std::string encode(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : s) {
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
    return out;
}

inline std::size_t length(std::string_view s) { return decode(s).size(); }

/// Code-point substring [start, end).
inline std::string substr(std::string_view s, std::size_t start, std::size_t end) {
    auto cps = decode(s);
    if (start > end || end > cps.size()) throw IntegrityError("span out of range");
    return encode(std::u32string_view(cps).substr(start, end - start));
}

} // namespace persum::utf8
