#pragma once

// Two-pass assembler and image packer.
//
// Source dialect:
//   Loop:  add $r5, $r2, $r2     # '#' or ';' start a comment
//          lw  $r6, 0($r5)
//          lkw 0($r1)            # lklw alias
//          crypt 1
//
// Registers are $r0..$r31 or $0..$31. Immediates are decimal or 0x-hex,
// optionally signed. Each instruction occupies one 8-byte slot; jump targets
// and branch displacements count slots. A numeric branch/jump operand is
// taken as the raw encoded field.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "emips/block.hpp"
#include "emips/des.hpp"
#include "emips/error.hpp"
#include "emips/hex_image.hpp"
#include "emips/isa.hpp"

namespace emips {

class AsmError : public Error {
 public:
  enum class Kind {
    Syntax,
    UnknownMnemonic,
    BadOperand,
    UndefinedLabel,
    DuplicateLabel,
    BranchOutOfRange,
    NoCryptInstruction,
    MultipleCryptInstructions,
  };

  // line == 0 means the error is not tied to a source line.
  AsmError(Kind kind, std::size_t line, const std::string& detail);
  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

struct RegisterOperand {
  unsigned index = 0;
  bool operator==(const RegisterOperand&) const = default;
};
struct ImmediateOperand {
  std::int64_t value = 0;
  bool operator==(const ImmediateOperand&) const = default;
};
struct MemoryOperand {
  std::int64_t offset = 0;
  unsigned base = 0;
  bool operator==(const MemoryOperand&) const = default;
};
struct LabelOperand {
  std::string name;
  bool operator==(const LabelOperand&) const = default;
};
using Operand =
    std::variant<RegisterOperand, ImmediateOperand, MemoryOperand, LabelOperand>;

// `nop` parses to sll with three zero operands; a label-only line has no
// mnemonic and binds to the next instruction.
struct Statement {
  std::optional<std::string> label;
  std::optional<Mnemonic> mnemonic;
  std::vector<Operand> operands;
  std::size_t line = 0;

  bool operator==(const Statement&) const = default;
};

using SymbolTable = std::map<std::string, std::uint32_t>;  // label -> byte address

struct Assembly {
  std::vector<std::uint32_t> words;  // word i sits at byte address 8*i
  SymbolTable symbols;
};

struct ProgramImage {
  std::vector<Block64> blocks;  // block i sits at byte address 8*i
  SymbolTable symbols;
  std::optional<std::size_t> crypt_boundary;  // first encrypted block

  MemoryImage to_memory_image() const;
  bool operator==(const ProgramImage&) const = default;
};

inline constexpr std::uint32_t kSlotBytes = 8;

std::vector<Statement> parse(std::string_view source);

// Inserts nops so that at least two instructions separate the last
// lklw/lkuw from a following crypt. A label on the crypt moves to the
// first inserted nop.
std::vector<Statement> insert_key_nops(std::vector<Statement> statements);

Assembly assemble(const std::vector<Statement>& statements);
Assembly assemble_source(std::string_view source, bool auto_nop = false);

std::vector<Block64> pack(const std::vector<std::uint32_t>& words);

ProgramImage make_image(const Assembly& assembly);

// Encrypts every block after the single crypt instruction (or from
// `boundary` when given). Blocks up to and including crypt are untouched.
ProgramImage encrypt_image(ProgramImage image, DesKey key,
                           std::optional<std::size_t> boundary = std::nullopt);

// One disassembled instruction per line; reassembles to the same words.
// Every word must decode.
std::string disassemble_listing(const std::vector<std::uint32_t>& words);

}  // namespace emips
