#pragma once

#include <cstddef>
#include <cstdint>

namespace aprl {

// CRC-32C (Castagnoli), software table implementation.
std::uint32_t crc32c(const void* data, std::size_t len, std::uint32_t seed = 0);

}  // namespace aprl
