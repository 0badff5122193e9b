#pragma once

#include <cstdint>
#include <cstring>

#include "path24/nn.hpp"

namespace path24 {

// FNV-1a over raw bytes; used to fingerprint weight blobs in tests and
// freeze checks.
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t hash_matrix(const Matrix& m, std::uint64_t h =
                                                      0xcbf29ce484222325ULL) {
  return fnv1a(m.data(), sizeof(double) * m.size(), h);
}

}  // namespace path24
