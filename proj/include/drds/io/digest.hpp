#pragma once

// SHA-256 digest of a byte string, hex-encoded.  Reports embed the digest of
// the canonicalized scenario so a report can always be paired with the exact
// inputs that produced it.

#include <openssl/evp.h>

#include <stdexcept>
#include <string>
#include <string_view>

namespace drds::io {

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256_hex: digest computation failed");
  static const char* hexd = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hexd[md[i] >> 4]);
    out.push_back(hexd[md[i] & 0xf]);
  }
  return out;
}

}  // namespace drds::io
