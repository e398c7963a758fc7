#pragma once

#include <cstdint>

namespace emips {

// Unit of every instruction/data memory access and of DES encryption.
using Block64 = std::uint64_t;

// 32-bit values occupy the low half of a block; the high half is zero.
// This placement reproduces the published ciphertext for the sample key.
constexpr Block64 pad_word(std::uint32_t word) { return Block64{word}; }

constexpr std::uint32_t block_payload(Block64 block) {
  return static_cast<std::uint32_t>(block & 0xFFFFFFFFu);
}

}  // namespace emips
