#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>

#include "emips/block.hpp"
#include "emips/error.hpp"
#include "emips/hex_image.hpp"

namespace emips {

inline constexpr unsigned kNumRegisters = 32;

// $r0 reads as zero; writes to it are dropped.
class RegisterFile {
 public:
  std::uint32_t read(unsigned index) const;
  void write(unsigned index, std::uint32_t value);

  bool operator==(const RegisterFile&) const = default;

 private:
  std::array<std::uint32_t, kNumRegisters> regs_{};
};

class KeyNotLoaded : public Error {
 public:
  KeyNotLoaded() : Error("DES key register not loaded (need lklw and lkuw)") {}
};

class KeyRegister {
 public:
  void set_lower(std::uint32_t v);
  void set_upper(std::uint32_t v);

  bool complete() const { return lower_loaded_ && upper_loaded_; }
  bool lower_loaded() const { return lower_loaded_; }
  bool upper_loaded() const { return upper_loaded_; }

  // upper:lower; throws KeyNotLoaded until both halves are set.
  std::uint64_t value() const;
  std::optional<std::uint64_t> try_value() const;

  bool operator==(const KeyRegister&) const = default;

 private:
  std::uint32_t lower_ = 0;
  std::uint32_t upper_ = 0;
  bool lower_loaded_ = false;
  bool upper_loaded_ = false;
};

class UnalignedAccess : public Error {
 public:
  explicit UnalignedAccess(std::uint32_t address);
  std::uint32_t address() const { return address_; }

 private:
  std::uint32_t address_;
};

// Sparse byte-addressed memory accessed in aligned 64-bit blocks.
class Memory {
 public:
  static constexpr std::uint32_t kBlockBytes = 8;

  Block64 read_block(std::uint32_t address) const;
  void write_block(std::uint32_t address, Block64 block);

  // Little-endian within a block: byte a is bits 7..0 of the block at a.
  std::uint8_t read_byte(std::uint32_t address) const;

  void load(const MemoryImage& image);

  // One past the highest written block (0 when empty).
  std::uint64_t extent() const { return extent_; }
  const std::map<std::uint32_t, Block64>& blocks() const { return blocks_; }

  // Equality over contents; blocks explicitly written as zero compare equal
  // to never-written ones.
  bool operator==(const Memory& other) const;

 private:
  std::map<std::uint32_t, Block64> blocks_;
  std::uint64_t extent_ = 0;
};

// "$r4 = cba767ee" per register.
void dump_registers(std::ostream& os, const RegisterFile& regs);
void dump_register(std::ostream& os, const RegisterFile& regs, unsigned index);
void dump_key(std::ostream& os, const KeyRegister& key);

// "00000038: 10539160018d5ff7" per block overlapping [begin, end).
void dump_memory(std::ostream& os, const Memory& mem, std::uint32_t begin,
                 std::uint32_t end);

}  // namespace emips
