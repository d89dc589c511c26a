/// @file digest.cpp

#include "jury/digest.hpp"

#include <array>
#include <cstdio>

#include <openssl/evp.h>

namespace jury {

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> buf{};
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), buf.data(), &len, EVP_sha256(), nullptr);

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[buf[i] >> 4]);
        out.push_back(hex[buf[i] & 0xf]);
    }
    return out;
}

}  // namespace jury
