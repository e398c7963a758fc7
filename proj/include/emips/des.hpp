#pragma once

// DES (FIPS 46-3) over single 64-bit blocks. Bits are numbered 1..64 from
// the most significant end, as in the standard's tables.

#include <array>
#include <cstdint>
#include <span>

namespace emips {

// 64-bit DES key. The eight parity bits (the low bit of every byte) are
// carried but never validated or used.
struct DesKey {
  std::uint64_t bits = 0;
  bool operator==(const DesKey&) const = default;
};

class KeySchedule {
 public:
  static constexpr std::size_t kRounds = 16;

  explicit KeySchedule(DesKey key);

  // 48-bit round keys, in encryption order.
  std::span<const std::uint64_t, kRounds> subkeys() const { return subkeys_; }
  std::uint64_t operator[](std::size_t round) const { return subkeys_[round]; }

  bool operator==(const KeySchedule&) const = default;

 private:
  std::array<std::uint64_t, kRounds> subkeys_{};
};

KeySchedule key_schedule(DesKey key);

// E-expansion, subkey mix, S-boxes, P-permutation.
std::uint32_t feistel_f(std::uint32_t half, std::uint64_t subkey);

std::uint64_t encrypt_block(std::uint64_t plaintext, const KeySchedule& sched);
std::uint64_t decrypt_block(std::uint64_t ciphertext, const KeySchedule& sched);

inline std::uint64_t des_encrypt(std::uint64_t plaintext, DesKey key) {
  return encrypt_block(plaintext, KeySchedule(key));
}
inline std::uint64_t des_decrypt(std::uint64_t ciphertext, DesKey key) {
  return decrypt_block(ciphertext, KeySchedule(key));
}

}  // namespace emips
