#include "emips/interpreter.hpp"

#include <fmt/format.h>

#include "emips/des.hpp"

namespace emips {
namespace {

struct Machine {
  std::uint32_t pc = 0;
  RegisterFile regs;
  KeyRegister key;
  Memory dmem;
  bool crypt_mode = false;
};

std::uint32_t load_word(const Machine& m, std::uint32_t pc, std::uint32_t addr,
                        bool decrypt) {
  if (addr % 8) throw Fault(Fault::Kind::UnalignedAccess, pc,
                            fmt::format("load from {}", addr));
  Block64 b = m.dmem.read_block(addr);
  if (decrypt) {
    if (!m.key.complete())
      throw Fault(Fault::Kind::KeyNotLoadedOnLoad, pc, "decrypting load");
    b = des_decrypt(b, DesKey{m.key.value()});
  }
  return block_payload(b);
}

// Executes the instruction at m.pc and advances it.
void execute(Machine& m, const Instruction& in, bool decrypt_loads) {
  const std::uint32_t rs = m.regs.read(in.rs);
  const std::uint32_t rt = m.regs.read(in.rt);
  const auto sext = static_cast<std::uint32_t>(in.simm());
  std::uint32_t next = m.pc + 8;

  switch (in.mnemonic) {
    case Mnemonic::Sll: m.regs.write(in.rd, rt << in.shamt); break;
    case Mnemonic::Add: m.regs.write(in.rd, rs + rt); break;
    case Mnemonic::Sub: m.regs.write(in.rd, rs - rt); break;
    case Mnemonic::And: m.regs.write(in.rd, rs & rt); break;
    case Mnemonic::Or: m.regs.write(in.rd, rs | rt); break;
    case Mnemonic::Slt:
      m.regs.write(in.rd, static_cast<std::int32_t>(rs) <
                                  static_cast<std::int32_t>(rt)
                              ? 1u
                              : 0u);
      break;
    case Mnemonic::Addi: m.regs.write(in.rt, rs + sext); break;
    case Mnemonic::Lw:
      m.regs.write(in.rt, load_word(m, m.pc, rs + sext,
                                    decrypt_loads && m.crypt_mode));
      break;
    case Mnemonic::Sw: {
      const std::uint32_t addr = rs + sext;
      if (addr % 8) throw Fault(Fault::Kind::UnalignedAccess, m.pc,
                                fmt::format("store to {}", addr));
      Block64 b = pad_word(rt);
      if (m.crypt_mode) {
        if (!m.key.complete())
          throw Fault(Fault::Kind::KeyNotLoadedOnStore, m.pc, "encrypting store");
        b = des_encrypt(b, DesKey{m.key.value()});
      }
      m.dmem.write_block(addr, b);
      break;
    }
    case Mnemonic::Lklw:
      m.key.set_lower(load_word(m, m.pc, rs + sext, false));
      break;
    case Mnemonic::Lkuw:
      m.key.set_upper(load_word(m, m.pc, rs + sext, false));
      break;
    case Mnemonic::Beq:
      if (rs == rt) next = m.pc + 8 + sext * 8;
      break;
    case Mnemonic::Bne:
      if (rs != rt) next = m.pc + 8 + sext * 8;
      break;
    case Mnemonic::J: next = in.target * 8; break;
    case Mnemonic::Crypt: m.crypt_mode = in.target != 0; break;
  }
  m.pc = next;
}

}  // namespace

InterpreterResult reference_interpret(const Memory& imem, Memory dmem,
                                      const InterpreterOptions& options) {
  Machine m;
  m.dmem = std::move(dmem);
  InterpreterResult r;
  try {
    while (m.pc < imem.extent()) {
      if (r.steps >= options.max_steps) {
        r.status = RunStatus::CycleLimit;
        break;
      }
      const std::uint32_t word = block_payload(imem.read_block(m.pc));
      const auto in = try_decode(word);
      if (!in) {
        throw Fault(Fault::Kind::UnknownInstruction, m.pc,
                    fmt::format("word {:08x}", word));
      }
      const std::uint32_t pc = m.pc;
      execute(m, *in, options.decrypt_loads);
      ++r.steps;
      if (options.record_retired) r.retired.push_back({pc, word});
    }
  } catch (const Fault& f) {
    r.status = RunStatus::Fault;
    r.fault_message = f.what();
    r.fault_kind = f.kind();
  }
  r.regs = m.regs;
  r.key = m.key;
  r.dmem = std::move(m.dmem);
  r.crypt_mode = m.crypt_mode;
  return r;
}

}  // namespace emips
