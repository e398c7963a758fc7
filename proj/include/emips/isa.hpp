#pragma once

// Instruction formats and opcode table for the encrypted MIPS subset.
//
//   R-type: | op:6 | rs:5 | rt:5 | rd:5 | shamt:5 | funct:6 |
//   I-type: | op:6 | rs:5 | rt:5 |        imm:16           |
//   J-type: | op:6 |              target:26                |
//
// lklw/lkuw are I-type loads that route the fetched word into the key
// register instead of a GPR. crypt is J-type; a nonzero target turns on
// decrypting fetches and encrypting stores, zero turns them off.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "emips/error.hpp"

namespace emips {

enum class Format : std::uint8_t { R, I, J };

enum class Mnemonic : std::uint8_t {
  Sll,
  Add,
  Sub,
  And,
  Or,
  Slt,
  Addi,
  Lw,
  Sw,
  Beq,
  Bne,
  J,
  Lklw,
  Lkuw,
  Crypt,
};

namespace opcode {
inline constexpr std::uint8_t kSpecial = 0x00;
inline constexpr std::uint8_t kJ = 0x02;
inline constexpr std::uint8_t kBeq = 0x04;
inline constexpr std::uint8_t kBne = 0x05;
inline constexpr std::uint8_t kAddi = 0x08;
inline constexpr std::uint8_t kLklw = 0x1A;
inline constexpr std::uint8_t kLkuw = 0x1B;
inline constexpr std::uint8_t kCrypt = 0x1C;
inline constexpr std::uint8_t kLw = 0x23;
inline constexpr std::uint8_t kSw = 0x2B;
}  // namespace opcode

namespace funct {
inline constexpr std::uint8_t kSll = 0x00;
inline constexpr std::uint8_t kAdd = 0x20;
inline constexpr std::uint8_t kSub = 0x22;
inline constexpr std::uint8_t kAnd = 0x24;
inline constexpr std::uint8_t kOr = 0x25;
inline constexpr std::uint8_t kSlt = 0x2A;
}  // namespace funct

struct MnemonicInfo {
  Mnemonic mnemonic;
  std::string_view name;
  Format format;
  std::uint8_t opcode;
  std::uint8_t funct;  // meaningful for R-type only
};

const MnemonicInfo& info(Mnemonic m);
Format format_of(Mnemonic m);
std::string_view name_of(Mnemonic m);

// Case-insensitive; accepts the alias "lkw" for lklw. "nop" is an assembler
// pseudo-instruction and is not recognized here.
std::optional<Mnemonic> mnemonic_from_name(std::string_view name);

// A decoded instruction. Fields that do not belong to the mnemonic's format
// are zero; `imm` holds the raw 16 bits and `target` the raw 26 bits.
struct Instruction {
  Mnemonic mnemonic = Mnemonic::Sll;
  std::uint8_t rs = 0;
  std::uint8_t rt = 0;
  std::uint8_t rd = 0;
  std::uint8_t shamt = 0;
  std::uint16_t imm = 0;
  std::uint32_t target = 0;

  Format format() const { return format_of(mnemonic); }
  std::int32_t simm() const { return static_cast<std::int16_t>(imm); }

  bool operator==(const Instruction&) const = default;

  static Instruction r(Mnemonic m, unsigned rd, unsigned rs, unsigned rt,
                       unsigned shamt = 0);
  static Instruction i(Mnemonic m, unsigned rt, unsigned rs, std::int32_t imm);
  static Instruction j(Mnemonic m, std::uint32_t target);
  static Instruction nop() { return Instruction{}; }
};

class UnknownInstruction : public Error {
 public:
  explicit UnknownInstruction(std::uint32_t word);
  std::uint32_t word() const { return word_; }

 private:
  std::uint32_t word_;
};

class FieldOverflow : public Error {
 public:
  explicit FieldOverflow(std::string field);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Field extraction, valid for any word regardless of opcode.
struct RawFields {
  std::uint8_t opcode, rs, rt, rd, shamt, funct;
  std::uint16_t imm;
  std::uint32_t target;
};
RawFields split_fields(std::uint32_t word);

Instruction decode(std::uint32_t word);
std::optional<Instruction> try_decode(std::uint32_t word);
std::uint32_t encode(const Instruction& instr);

// Canonical assembler syntax, e.g. "addi $r1, $r0, 104" or "sw $r4, 56($r0)".
// Branch and jump operands print as raw slot counts.
std::string disassemble(const Instruction& instr);

// Disassembly for arbitrary words; unknown words print as ".word 0x...".
std::string disassemble_word(std::uint32_t word);

}  // namespace emips
