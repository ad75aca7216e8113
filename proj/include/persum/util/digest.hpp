#pragma once

#include <openssl/evp.h>

#include <array>
#include <string>
#include <string_view>

#include "persum/util/error.hpp"

namespace persum {

/// Hex SHA-256 of `data`.
inline std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xF]);
    }
    return out;
}

/// Digest over a sequence of fields; each field is length-prefixed so that
/// ("ab","c") and ("a","bc") differ.
class Sha256Builder {
  public:
    Sha256Builder& add(std::string_view field) {
        buf_ += std::to_string(field.size());
        buf_.push_back(':');
        buf_.append(field);
        return *this;
    }
    std::string hex() const { return sha256_hex(buf_); }

  private:
    std::string buf_;
};

} // namespace persum
