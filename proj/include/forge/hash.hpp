#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace forge {

// Hex-encoded SHA-256 digest (64 lowercase hex chars). Backed by OpenSSL.
std::string sha256_hex(std::string_view data);

// FNV-1a 64-bit. Used for deriving RNG stream seeds from labels.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace forge
