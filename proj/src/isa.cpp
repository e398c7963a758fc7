#include "emips/isa.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fmt/format.h>

namespace emips {
namespace {

constexpr std::array<MnemonicInfo, 15> kTable{{
    {Mnemonic::Sll, "sll", Format::R, opcode::kSpecial, funct::kSll},
    {Mnemonic::Add, "add", Format::R, opcode::kSpecial, funct::kAdd},
    {Mnemonic::Sub, "sub", Format::R, opcode::kSpecial, funct::kSub},
    {Mnemonic::And, "and", Format::R, opcode::kSpecial, funct::kAnd},
    {Mnemonic::Or, "or", Format::R, opcode::kSpecial, funct::kOr},
    {Mnemonic::Slt, "slt", Format::R, opcode::kSpecial, funct::kSlt},
    {Mnemonic::Addi, "addi", Format::I, opcode::kAddi, 0},
    {Mnemonic::Lw, "lw", Format::I, opcode::kLw, 0},
    {Mnemonic::Sw, "sw", Format::I, opcode::kSw, 0},
    {Mnemonic::Beq, "beq", Format::I, opcode::kBeq, 0},
    {Mnemonic::Bne, "bne", Format::I, opcode::kBne, 0},
    {Mnemonic::J, "j", Format::J, opcode::kJ, 0},
    {Mnemonic::Lklw, "lklw", Format::I, opcode::kLklw, 0},
    {Mnemonic::Lkuw, "lkuw", Format::I, opcode::kLkuw, 0},
    {Mnemonic::Crypt, "crypt", Format::J, opcode::kCrypt, 0},
}};

std::optional<Mnemonic> lookup(std::uint8_t op, std::uint8_t fn) {
  for (const auto& e : kTable) {
    if (e.opcode != op) continue;
    if (e.format == Format::R && e.funct != fn) continue;
    return e.mnemonic;
  }
  return std::nullopt;
}

void check_width(std::uint32_t value, unsigned bits, const char* name) {
  if (value >> bits) throw FieldOverflow(name);
}

}  // namespace

const MnemonicInfo& info(Mnemonic m) {
  return kTable[static_cast<std::size_t>(m)];
}

Format format_of(Mnemonic m) { return info(m).format; }
std::string_view name_of(Mnemonic m) { return info(m).name; }

std::optional<Mnemonic> mnemonic_from_name(std::string_view name) {
  std::string lower(name);
  std::ranges::transform(lower, lower.begin(),
                         [](unsigned char c) { return std::tolower(c); });
  if (lower == "lkw") return Mnemonic::Lklw;
  for (const auto& e : kTable) {
    if (e.name == lower) return e.mnemonic;
  }
  return std::nullopt;
}

Instruction Instruction::r(Mnemonic m, unsigned rd, unsigned rs, unsigned rt,
                           unsigned shamt) {
  Instruction in;
  in.mnemonic = m;
  in.rd = static_cast<std::uint8_t>(rd);
  in.rs = static_cast<std::uint8_t>(rs);
  in.rt = static_cast<std::uint8_t>(rt);
  in.shamt = static_cast<std::uint8_t>(shamt);
  return in;
}

Instruction Instruction::i(Mnemonic m, unsigned rt, unsigned rs,
                           std::int32_t imm) {
  Instruction in;
  in.mnemonic = m;
  in.rt = static_cast<std::uint8_t>(rt);
  in.rs = static_cast<std::uint8_t>(rs);
  in.imm = static_cast<std::uint16_t>(imm);
  return in;
}

Instruction Instruction::j(Mnemonic m, std::uint32_t target) {
  Instruction in;
  in.mnemonic = m;
  in.target = target;
  return in;
}

UnknownInstruction::UnknownInstruction(std::uint32_t word)
    : Error(fmt::format("unknown instruction 0x{:08x} (opcode 0x{:02x})", word,
                        word >> 26)),
      word_(word) {}

FieldOverflow::FieldOverflow(std::string field)
    : Error("field overflow: " + field), field_(std::move(field)) {}

RawFields split_fields(std::uint32_t w) {
  return RawFields{
      .opcode = static_cast<std::uint8_t>(w >> 26),
      .rs = static_cast<std::uint8_t>((w >> 21) & 0x1F),
      .rt = static_cast<std::uint8_t>((w >> 16) & 0x1F),
      .rd = static_cast<std::uint8_t>((w >> 11) & 0x1F),
      .shamt = static_cast<std::uint8_t>((w >> 6) & 0x1F),
      .funct = static_cast<std::uint8_t>(w & 0x3F),
      .imm = static_cast<std::uint16_t>(w & 0xFFFF),
      .target = w & 0x03FFFFFF,
  };
}

std::optional<Instruction> try_decode(std::uint32_t word) {
  const RawFields f = split_fields(word);
  const auto m = lookup(f.opcode, f.funct);
  if (!m) return std::nullopt;
  Instruction in;
  in.mnemonic = *m;
  switch (format_of(*m)) {
    case Format::R:
      in.rs = f.rs;
      in.rt = f.rt;
      in.rd = f.rd;
      in.shamt = f.shamt;
      break;
    case Format::I:
      in.rs = f.rs;
      in.rt = f.rt;
      in.imm = f.imm;
      break;
    case Format::J:
      in.target = f.target;
      break;
  }
  return in;
}

Instruction decode(std::uint32_t word) {
  if (auto in = try_decode(word)) return *in;
  throw UnknownInstruction(word);
}

std::uint32_t encode(const Instruction& in) {
  const MnemonicInfo& mi = info(in.mnemonic);
  const std::uint32_t op = static_cast<std::uint32_t>(mi.opcode) << 26;
  switch (mi.format) {
    case Format::R:
      check_width(in.rs, 5, "rs");
      check_width(in.rt, 5, "rt");
      check_width(in.rd, 5, "rd");
      check_width(in.shamt, 5, "shamt");
      if (in.imm != 0) throw FieldOverflow("imm (not an R-type field)");
      if (in.target != 0) throw FieldOverflow("target (not an R-type field)");
      return op | std::uint32_t{in.rs} << 21 | std::uint32_t{in.rt} << 16 |
             std::uint32_t{in.rd} << 11 | std::uint32_t{in.shamt} << 6 |
             mi.funct;
    case Format::I:
      check_width(in.rs, 5, "rs");
      check_width(in.rt, 5, "rt");
      if (in.rd != 0 || in.shamt != 0)
        throw FieldOverflow("rd/shamt (not I-type fields)");
      if (in.target != 0) throw FieldOverflow("target (not an I-type field)");
      return op | std::uint32_t{in.rs} << 21 | std::uint32_t{in.rt} << 16 |
             in.imm;
    case Format::J:
      check_width(in.target, 26, "target");
      if (in.rs || in.rt || in.rd || in.shamt || in.imm)
        throw FieldOverflow("register/imm fields (not J-type fields)");
      return op | in.target;
  }
  return 0;
}

std::string disassemble(const Instruction& in) {
  const std::string_view name = name_of(in.mnemonic);
  switch (in.mnemonic) {
    case Mnemonic::Sll:
      if (in == Instruction::nop()) return "nop";
      return fmt::format("sll $r{}, $r{}, {}", in.rd, in.rt, in.shamt);
    case Mnemonic::Add:
    case Mnemonic::Sub:
    case Mnemonic::And:
    case Mnemonic::Or:
    case Mnemonic::Slt:
      return fmt::format("{} $r{}, $r{}, $r{}", name, in.rd, in.rs, in.rt);
    case Mnemonic::Addi:
      return fmt::format("addi $r{}, $r{}, {}", in.rt, in.rs, in.simm());
    case Mnemonic::Lw:
    case Mnemonic::Sw:
      return fmt::format("{} $r{}, {}($r{})", name, in.rt, in.simm(), in.rs);
    case Mnemonic::Beq:
    case Mnemonic::Bne:
      return fmt::format("{} $r{}, $r{}, {}", name, in.rs, in.rt, in.simm());
    case Mnemonic::Lklw:
    case Mnemonic::Lkuw:
      return fmt::format("{} {}($r{})", name, in.simm(), in.rs);
    case Mnemonic::J:
    case Mnemonic::Crypt:
      return fmt::format("{} {}", name, in.target);
  }
  return {};
}

std::string disassemble_word(std::uint32_t word) {
  if (auto in = try_decode(word)) return disassemble(*in);
  return fmt::format(".word 0x{:08x}", word);
}

}  // namespace emips
