#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace wsckit {

// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

// SHA-256 of a file's contents. Throws DataError if unreadable.
std::string file_sha256_hex(const std::string& path);

// 16-hex-digit digest of the parts joined with a unit separator (0x1f).
// Used for example ids; stable across platforms and runs.
std::string stable_digest(std::initializer_list<std::string_view> parts);

std::uint64_t fnv1a64(std::string_view bytes);

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Uniform 64-bit value determined by (seed, key). Membership decisions made
// from it do not depend on stream order.
inline std::uint64_t seeded_hash(std::uint64_t seed, std::string_view key) {
  return mix64(fnv1a64(key) ^ mix64(seed ^ 0x9e3779b97f4a7c15ULL));
}

}  // namespace wsckit
