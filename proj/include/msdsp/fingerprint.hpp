#pragma once

// Git-style content fingerprint: SHA-1 over "blob <size>\0" followed by a
// canonical byte encoding of the dataset.

#include <openssl/evp.h>

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "msdsp/model.hpp"

namespace msdsp {

inline std::string sha1_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  require(ctx != nullptr, ErrorCode::IoError, "cannot allocate digest context");
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out.push_back(hex[digest[k] >> 4]);
    out.push_back(hex[digest[k] & 0xf]);
  }
  return out;
}

inline std::string git_blob_sha1(std::string_view content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob.append(content);
  return sha1_hex(blob);
}

namespace detail {

template <class T>
void append_raw(std::string& out, const T& v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace detail

inline std::string dataset_fingerprint(const TimeSeriesDataset& d) {
  std::string bytes;
  detail::append_raw(bytes, static_cast<std::int64_t>(d.y.size()));
  detail::append_raw(bytes, static_cast<std::int64_t>(d.X.cols()));
  detail::append_raw(bytes, static_cast<std::int64_t>(d.horizon));
  for (Index t = 0; t < d.y.size(); ++t) detail::append_raw(bytes, d.y[t]);
  for (Index t = 0; t < d.X.rows(); ++t)
    for (Index j = 0; j < d.X.cols(); ++j) detail::append_raw(bytes, d.X(t, j));
  for (const auto& l : d.labels) {
    bytes.append(l);
    bytes.push_back('\n');
  }
  return git_blob_sha1(bytes);
}

}  // namespace msdsp
