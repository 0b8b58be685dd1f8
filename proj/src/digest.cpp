#include "vict/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <memory>

namespace vict {

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256: init failed");
  }

  void update(const void* data, std::size_t len) {
    if (EVP_DigestUpdate(ctx_.get(), data, len) != 1) throw Error("sha256: update failed");
  }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) throw Error("sha256: final failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kHex[md[i] >> 4]);
      out.push_back(kHex[md[i] & 0xf]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

void put_u64(Sha256& h, std::uint64_t v) {
  std::array<unsigned char, 8> b{};
  for (std::size_t i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  h.update(b.data(), b.size());
}

}  // namespace

std::string sha256_hex(std::span<const std::byte> bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string params_digest(const Params<float>& params) {
  Sha256 h;
  put_u64(h, params.size());
  for (const auto& e : params.entries()) {
    put_u64(h, e.name.size());
    h.update(e.name.data(), e.name.size());
    put_u64(h, static_cast<std::uint64_t>(e.group));
    put_u64(h, e.value.rank());
    for (auto d : e.value.shape()) put_u64(h, d);
    h.update(e.value.data().data(), e.value.numel() * sizeof(float));
  }
  return h.hex();
}

}  // namespace vict
