#include "emips/assembler.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>

namespace emips {
namespace {

const char* kind_name(AsmError::Kind k) {
  switch (k) {
    case AsmError::Kind::Syntax: return "syntax error";
    case AsmError::Kind::UnknownMnemonic: return "unknown mnemonic";
    case AsmError::Kind::BadOperand: return "bad operand";
    case AsmError::Kind::UndefinedLabel: return "undefined label";
    case AsmError::Kind::DuplicateLabel: return "duplicate label";
    case AsmError::Kind::BranchOutOfRange: return "branch out of range";
    case AsmError::Kind::NoCryptInstruction: return "no crypt instruction";
    case AsmError::Kind::MultipleCryptInstructions:
      return "multiple crypt instructions";
  }
  return "error";
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}
bool is_identifier(std::string_view s) {
  return !s.empty() && is_ident_start(s.front()) &&
         std::ranges::all_of(s, is_ident_char);
}

std::optional<std::int64_t> parse_number(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  if (v > std::uint64_t{1} << 40) return std::nullopt;
  const auto sv = static_cast<std::int64_t>(v);
  return negative ? -sv : sv;
}

std::optional<unsigned> parse_register(std::string_view s) {
  if (s.empty() || s.front() != '$') return std::nullopt;
  s.remove_prefix(1);
  if (!s.empty() && (s.front() == 'r' || s.front() == 'R')) s.remove_prefix(1);
  if (s.empty() || s.size() > 2) return std::nullopt;
  unsigned v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v >= 32)
    return std::nullopt;
  return v;
}

Operand parse_operand(std::string_view text, std::size_t line) {
  auto bad = [&](const char* why) {
    return AsmError(AsmError::Kind::BadOperand, line,
                    fmt::format("'{}': {}", text, why));
  };
  if (const auto open = text.find('('); open != std::string_view::npos) {
    const auto close = text.find(')', open);
    if (close == std::string_view::npos || close + 1 != text.size())
      throw bad("malformed memory operand");
    const std::string_view off = trim(text.substr(0, open));
    const auto base = parse_register(trim(text.substr(open + 1, close - open - 1)));
    if (!base) throw bad("expected base register");
    std::int64_t offset = 0;
    if (!off.empty()) {
      const auto n = parse_number(off);
      if (!n) throw bad("expected numeric offset");
      offset = *n;
    }
    return MemoryOperand{offset, *base};
  }
  if (text.front() == '$') {
    if (const auto r = parse_register(text)) return RegisterOperand{*r};
    throw bad("expected $r0..$r31");
  }
  if (const auto n = parse_number(text)) return ImmediateOperand{*n};
  if (is_identifier(text)) return LabelOperand{std::string(text)};
  throw bad("not a register, immediate, memory operand or label");
}

enum class Kind { Reg, Imm, Mem, Target };

std::vector<Kind> signature(Mnemonic m) {
  switch (m) {
    case Mnemonic::Add:
    case Mnemonic::Sub:
    case Mnemonic::And:
    case Mnemonic::Or:
    case Mnemonic::Slt:
      return {Kind::Reg, Kind::Reg, Kind::Reg};
    case Mnemonic::Sll:
    case Mnemonic::Addi:
      return {Kind::Reg, Kind::Reg, Kind::Imm};
    case Mnemonic::Lw:
    case Mnemonic::Sw:
      return {Kind::Reg, Kind::Mem};
    case Mnemonic::Beq:
    case Mnemonic::Bne:
      return {Kind::Reg, Kind::Reg, Kind::Target};
    case Mnemonic::J:
      return {Kind::Target};
    case Mnemonic::Lklw:
    case Mnemonic::Lkuw:
      return {Kind::Mem};
    case Mnemonic::Crypt:
      return {Kind::Imm};
  }
  return {};
}

bool matches(Kind k, const Operand& op) {
  switch (k) {
    case Kind::Reg: return std::holds_alternative<RegisterOperand>(op);
    case Kind::Imm: return std::holds_alternative<ImmediateOperand>(op);
    case Kind::Mem: return std::holds_alternative<MemoryOperand>(op);
    case Kind::Target:
      return std::holds_alternative<LabelOperand>(op) ||
             std::holds_alternative<ImmediateOperand>(op);
  }
  return false;
}

void check_range(std::int64_t v, std::int64_t lo, std::int64_t hi,
                 std::size_t line, const char* what) {
  if (v < lo || v > hi) {
    throw AsmError(AsmError::Kind::BadOperand, line,
                   fmt::format("{} {} outside [{}, {}]", what, v, lo, hi));
  }
}

std::vector<std::string_view> split_operands(std::string_view text,
                                             std::size_t line) {
  std::vector<std::string_view> out;
  if (trim(text).empty()) return out;
  while (true) {
    const auto comma = text.find(',');
    const auto piece = trim(text.substr(0, comma));
    if (piece.empty())
      throw AsmError(AsmError::Kind::Syntax, line, "empty operand");
    out.push_back(piece);
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return out;
}

Statement parse_line(std::string_view text, std::size_t line) {
  Statement st;
  st.line = line;

  if (const auto colon = text.find(':'); colon != std::string_view::npos) {
    const auto label = trim(text.substr(0, colon));
    if (!is_identifier(label)) {
      throw AsmError(AsmError::Kind::Syntax, line,
                     fmt::format("bad label '{}'", label));
    }
    st.label = std::string(label);
    text = trim(text.substr(colon + 1));
    if (text.empty()) return st;
  }

  const auto ws = text.find_first_of(" \t");
  const std::string_view name = text.substr(0, ws);
  const std::string_view rest =
      ws == std::string_view::npos ? std::string_view{} : text.substr(ws + 1);

  std::string lower(name);
  std::ranges::transform(lower, lower.begin(),
                         [](unsigned char c) { return std::tolower(c); });
  const auto texts = split_operands(rest, line);

  if (lower == "nop") {
    if (!texts.empty())
      throw AsmError(AsmError::Kind::BadOperand, line, "nop takes no operands");
    st.mnemonic = Mnemonic::Sll;
    st.operands = {RegisterOperand{0}, RegisterOperand{0}, ImmediateOperand{0}};
    return st;
  }

  const auto m = mnemonic_from_name(lower);
  if (!m) {
    throw AsmError(AsmError::Kind::UnknownMnemonic, line, std::string(name));
  }
  st.mnemonic = *m;
  for (auto t : texts) st.operands.push_back(parse_operand(t, line));

  const auto sig = signature(*m);
  if (sig.size() != st.operands.size()) {
    throw AsmError(AsmError::Kind::BadOperand, line,
                   fmt::format("{} expects {} operand(s), got {}", name,
                               sig.size(), st.operands.size()));
  }
  for (std::size_t k = 0; k < sig.size(); ++k) {
    if (!matches(sig[k], st.operands[k])) {
      throw AsmError(AsmError::Kind::BadOperand, line,
                     fmt::format("operand {} of {} has the wrong kind", k + 1,
                                 name));
    }
  }
  return st;
}

unsigned reg(const Operand& op) { return std::get<RegisterOperand>(op).index; }
std::int64_t imm(const Operand& op) {
  return std::get<ImmediateOperand>(op).value;
}

std::uint32_t label_address(const SymbolTable& symbols, const std::string& name,
                            std::size_t line) {
  const auto it = symbols.find(name);
  if (it == symbols.end())
    throw AsmError(AsmError::Kind::UndefinedLabel, line, name);
  return it->second;
}

Instruction encode_statement(const Statement& st, std::uint32_t address,
                             const SymbolTable& symbols) {
  const Mnemonic m = *st.mnemonic;
  const auto& ops = st.operands;
  const std::size_t line = st.line;
  switch (m) {
    case Mnemonic::Add:
    case Mnemonic::Sub:
    case Mnemonic::And:
    case Mnemonic::Or:
    case Mnemonic::Slt:
      return Instruction::r(m, reg(ops[0]), reg(ops[1]), reg(ops[2]));
    case Mnemonic::Sll:
      check_range(imm(ops[2]), 0, 31, line, "shift amount");
      return Instruction::r(m, reg(ops[0]), 0, reg(ops[1]),
                            static_cast<unsigned>(imm(ops[2])));
    case Mnemonic::Addi:
      check_range(imm(ops[2]), -32768, 65535, line, "immediate");
      return Instruction::i(m, reg(ops[0]), reg(ops[1]),
                            static_cast<std::int32_t>(imm(ops[2])));
    case Mnemonic::Lw:
    case Mnemonic::Sw: {
      const auto& mem = std::get<MemoryOperand>(ops[1]);
      check_range(mem.offset, -32768, 32767, line, "offset");
      return Instruction::i(m, reg(ops[0]), mem.base,
                            static_cast<std::int32_t>(mem.offset));
    }
    case Mnemonic::Lklw:
    case Mnemonic::Lkuw: {
      const auto& mem = std::get<MemoryOperand>(ops[0]);
      check_range(mem.offset, -32768, 32767, line, "offset");
      return Instruction::i(m, 0, mem.base,
                            static_cast<std::int32_t>(mem.offset));
    }
    case Mnemonic::Beq:
    case Mnemonic::Bne: {
      std::int64_t disp = 0;
      if (const auto* lbl = std::get_if<LabelOperand>(&ops[2])) {
        const std::int64_t target = label_address(symbols, lbl->name, line);
        disp = (target - (std::int64_t{address} + kSlotBytes)) / kSlotBytes;
      } else {
        disp = imm(ops[2]);
      }
      if (disp < -32768 || disp > 32767) {
        throw AsmError(AsmError::Kind::BranchOutOfRange, line,
                       fmt::format("displacement {} slots", disp));
      }
      return Instruction::i(m, reg(ops[1]), reg(ops[0]),
                            static_cast<std::int32_t>(disp));
    }
    case Mnemonic::J: {
      std::int64_t target = 0;
      if (const auto* lbl = std::get_if<LabelOperand>(&ops[0])) {
        target = label_address(symbols, lbl->name, line) / kSlotBytes;
      } else {
        target = imm(ops[0]);
      }
      if (target < 0 || target >= (std::int64_t{1} << 26)) {
        throw AsmError(AsmError::Kind::BranchOutOfRange, line,
                       fmt::format("jump target slot {}", target));
      }
      return Instruction::j(m, static_cast<std::uint32_t>(target));
    }
    case Mnemonic::Crypt:
      check_range(imm(ops[0]), 0, (std::int64_t{1} << 26) - 1, line,
                  "crypt argument");
      return Instruction::j(m, static_cast<std::uint32_t>(imm(ops[0])));
  }
  throw AsmError(AsmError::Kind::Syntax, line, "unhandled mnemonic");
}

bool is_key_load(const Statement& st) {
  return st.mnemonic == Mnemonic::Lklw || st.mnemonic == Mnemonic::Lkuw;
}

bool is_crypt_word(Block64 block) {
  const auto in = try_decode(block_payload(block));
  return in && in->mnemonic == Mnemonic::Crypt;
}

}  // namespace

AsmError::AsmError(Kind kind, std::size_t line, const std::string& detail)
    : Error(line ? fmt::format("line {}: {}: {}", line, kind_name(kind), detail)
                 : fmt::format("{}: {}", kind_name(kind), detail)),
      kind_(kind),
      line_(line) {}

std::vector<Statement> parse(std::string_view source) {
  std::vector<Statement> out;
  std::size_t line_no = 0;
  while (!source.empty()) {
    const auto nl = source.find('\n');
    std::string_view line = source.substr(0, nl);
    source = nl == std::string_view::npos ? std::string_view{}
                                          : source.substr(nl + 1);
    ++line_no;
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) {
      line = line.substr(0, c);
    }
    line = trim(line);
    if (line.empty()) continue;
    out.push_back(parse_line(line, line_no));
  }
  return out;
}

std::vector<Statement> insert_key_nops(std::vector<Statement> statements) {
  constexpr int kRequiredGap = 2;
  std::vector<Statement> out;
  out.reserve(statements.size() + kRequiredGap);
  std::optional<int> since_key_load;
  for (auto& st : statements) {
    if (st.mnemonic == Mnemonic::Crypt && since_key_load &&
        *since_key_load < kRequiredGap) {
      for (int k = *since_key_load; k < kRequiredGap; ++k) {
        Statement nop;
        nop.mnemonic = Mnemonic::Sll;
        nop.operands = {RegisterOperand{0}, RegisterOperand{0},
                        ImmediateOperand{0}};
        nop.line = st.line;
        if (k == *since_key_load) nop.label = std::exchange(st.label, {});
        out.push_back(std::move(nop));
      }
    }
    if (st.mnemonic) {
      if (is_key_load(st)) {
        since_key_load = 0;
      } else if (since_key_load) {
        ++*since_key_load;
      }
    }
    out.push_back(std::move(st));
  }
  return out;
}

Assembly assemble(const std::vector<Statement>& statements) {
  Assembly out;
  std::uint32_t address = 0;
  for (const auto& st : statements) {
    if (st.label) {
      if (!out.symbols.emplace(*st.label, address).second) {
        throw AsmError(AsmError::Kind::DuplicateLabel, st.line, *st.label);
      }
    }
    if (st.mnemonic) address += kSlotBytes;
  }

  address = 0;
  for (const auto& st : statements) {
    if (!st.mnemonic) continue;
    out.words.push_back(encode(encode_statement(st, address, out.symbols)));
    address += kSlotBytes;
  }
  return out;
}

Assembly assemble_source(std::string_view source, bool auto_nop) {
  auto statements = parse(source);
  if (auto_nop) statements = insert_key_nops(std::move(statements));
  return assemble(statements);
}

std::vector<Block64> pack(const std::vector<std::uint32_t>& words) {
  std::vector<Block64> blocks;
  blocks.reserve(words.size());
  std::ranges::transform(words, std::back_inserter(blocks), pad_word);
  return blocks;
}

ProgramImage make_image(const Assembly& assembly) {
  return ProgramImage{pack(assembly.words), assembly.symbols, std::nullopt};
}

MemoryImage ProgramImage::to_memory_image() const {
  MemoryImage m;
  m.blocks.reserve(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    m.blocks.push_back({static_cast<std::uint32_t>(i * kSlotBytes), blocks[i]});
  }
  return m;
}

ProgramImage encrypt_image(ProgramImage image, DesKey key,
                           std::optional<std::size_t> boundary) {
  if (!boundary) {
    std::optional<std::size_t> crypt_at;
    for (std::size_t i = 0; i < image.blocks.size(); ++i) {
      if (!is_crypt_word(image.blocks[i])) continue;
      if (crypt_at) {
        throw AsmError(AsmError::Kind::MultipleCryptInstructions, 0,
                       fmt::format("blocks {} and {}", *crypt_at, i));
      }
      crypt_at = i;
    }
    if (!crypt_at) {
      throw AsmError(AsmError::Kind::NoCryptInstruction, 0,
                     "--encrypt needs exactly one crypt instruction");
    }
    boundary = *crypt_at + 1;
  } else if (*boundary > image.blocks.size()) {
    throw AsmError(AsmError::Kind::Syntax, 0,
                   fmt::format("boundary {} past the last block", *boundary));
  }

  const KeySchedule sched(key);
  for (std::size_t i = *boundary; i < image.blocks.size(); ++i) {
    image.blocks[i] = encrypt_block(image.blocks[i], sched);
  }
  image.crypt_boundary = boundary;
  return image;
}

std::string disassemble_listing(const std::vector<std::uint32_t>& words) {
  std::string out;
  for (const std::uint32_t w : words) {
    out += disassemble(decode(w));
    out += '\n';
  }
  return out;
}

}  // namespace emips
