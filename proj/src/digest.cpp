#include "sat/digest.hpp"

#include <openssl/evp.h>

#include <cstring>

#include "sat/common.hpp"

namespace sat {

Sha256::Sha256() {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  SAT_CHECK_INTERNAL(ctx != nullptr, "sha256: context allocation failed");
  SAT_CHECK_INTERNAL(EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1, "sha256: init failed");
  ctx_ = ctx;
}

Sha256::~Sha256() {
  if (ctx_) EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
}

void Sha256::update(std::span<const uint8_t> bytes) {
  SAT_CHECK_INTERNAL(ctx_ != nullptr, "sha256: digest already finalized");
  SAT_CHECK_INTERNAL(
      EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), bytes.data(), bytes.size()) == 1,
      "sha256: update failed");
}

void Sha256::update(std::span<const double> values) {
  update(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(values.data()),
                                  values.size() * sizeof(double)));
}

std::string Sha256::hex_digest() {
  SAT_CHECK_INTERNAL(ctx_ != nullptr, "sha256: digest already finalized");
  unsigned char out[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  SAT_CHECK_INTERNAL(EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out, &len) == 1,
                 "sha256: final failed");
  EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
  ctx_ = nullptr;
  static const char* hex = "0123456789abcdef";
  std::string s;
  s.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    s.push_back(hex[out[i] >> 4]);
    s.push_back(hex[out[i] & 0xF]);
  }
  return s;
}

std::string sha256_hex(std::span<const uint8_t> bytes) {
  Sha256 h;
  h.update(bytes);
  return h.hex_digest();
}

}  // namespace sat
