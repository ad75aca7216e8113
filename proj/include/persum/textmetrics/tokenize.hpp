#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace persum::textmetrics {

/// Embedded in every report that depends on tokenization.
inline constexpr std::string_view kTokenizerTag = "persum-tok-v1(lowercase-ascii,alnum-runs,utf8-kept)";

/// Normalized token sequence. Only `tokenize` produces one.
struct TokenSeq {
    std::vector<std::string> tokens;
    std::size_t source_len_chars = 0;

    std::size_t size() const noexcept { return tokens.size(); }
    bool empty() const noexcept { return tokens.empty(); }
};

namespace detail {
inline bool is_word_byte(unsigned char c) noexcept {
    // Non-ASCII bytes are kept as word characters so accented words and
    // other scripts stay intact.
    return c >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
} // namespace detail

/// Lowercases ASCII and splits on whitespace and punctuation; numerals stay.
/// Idempotent: tokenizing the space-joined output reproduces it.
inline TokenSeq tokenize(std::string_view text) {
    TokenSeq seq;
    seq.source_len_chars = 0;
    for (unsigned char c : text) {
        if ((c & 0xC0) != 0x80) ++seq.source_len_chars;
    }
    std::string cur;
    for (unsigned char c : text) {
        if (detail::is_word_byte(c)) {
            cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
        } else if (!cur.empty()) {
            seq.tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) seq.tokens.push_back(std::move(cur));
    return seq;
}

} // namespace persum::textmetrics
