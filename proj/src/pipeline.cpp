#include "emips/pipeline.hpp"

#include <fmt/format.h>

#include "emips/des.hpp"

namespace emips {
namespace {

bool is_branch(Mnemonic m) { return m == Mnemonic::Beq || m == Mnemonic::Bne; }

template <typename Latch>
StageView view_of(const Latch& l) {
  switch (l.state) {
    case SlotState::Bubble: return {};
    case SlotState::End: return {StageView::Kind::End, 0, 0};
    case SlotState::Valid: return {StageView::Kind::Instr, l.pc, l.word};
  }
  return {};
}

std::string render(const StageView& v) {
  switch (v.kind) {
    case StageView::Kind::Bubble: return "bubble";
    case StageView::Kind::End: return "end";
    case StageView::Kind::Squashed: return "squashed";
    case StageView::Kind::Stalled: return "stalled";
    case StageView::Kind::Instr: return disassemble_word(v.word);
  }
  return {};
}

}  // namespace

Fault::Fault(Kind kind, std::uint32_t pc, const std::string& detail)
    : Error(fmt::format("{} at pc {:08x}: {}", fault_kind_name(kind), pc,
                        detail)),
      kind_(kind),
      pc_(pc) {}

const char* fault_kind_name(Fault::Kind kind) {
  switch (kind) {
    case Fault::Kind::UnknownInstruction: return "unknown instruction";
    case Fault::Kind::UnalignedAccess: return "unaligned access";
    case Fault::Kind::KeyNotLoadedOnFetch: return "key not loaded on decrypting fetch";
    case Fault::Kind::KeyNotLoadedOnStore: return "key not loaded on encrypting store";
    case Fault::Kind::KeyNotLoadedOnLoad: return "key not loaded on decrypting load";
  }
  return "fault";
}

Control control_for(const Instruction& in) {
  Control c;
  switch (in.mnemonic) {
    case Mnemonic::Add: c.alu = AluOp::Add; break;
    case Mnemonic::Sub: c.alu = AluOp::Sub; break;
    case Mnemonic::And: c.alu = AluOp::And; break;
    case Mnemonic::Or: c.alu = AluOp::Or; break;
    case Mnemonic::Slt: c.alu = AluOp::Slt; break;
    case Mnemonic::Sll: c.alu = AluOp::Sll; break;
    case Mnemonic::Addi:
      c.alu = AluOp::Add;
      c.alu_imm = true;
      c.reg_write = true;
      c.dest = in.rt;
      return c;
    case Mnemonic::Lw:
      c.alu = AluOp::Add;
      c.alu_imm = true;
      c.mem_read = true;
      c.reg_write = true;
      c.dest = in.rt;
      return c;
    case Mnemonic::Sw:
      c.alu = AluOp::Add;
      c.alu_imm = true;
      c.mem_write = true;
      return c;
    case Mnemonic::Lklw:
    case Mnemonic::Lkuw:
      c.alu = AluOp::Add;
      c.alu_imm = true;
      c.key_load =
          in.mnemonic == Mnemonic::Lklw ? KeyHalf::Lower : KeyHalf::Upper;
      return c;
    case Mnemonic::Beq:
    case Mnemonic::Bne:
    case Mnemonic::J:
    case Mnemonic::Crypt:
      return c;
  }
  // R-type ALU instructions
  c.reg_write = true;
  c.dest = in.rd;
  return c;
}

Sources sources_of(const Instruction& in) {
  switch (in.mnemonic) {
    case Mnemonic::Add:
    case Mnemonic::Sub:
    case Mnemonic::And:
    case Mnemonic::Or:
    case Mnemonic::Slt:
    case Mnemonic::Sw:
    case Mnemonic::Beq:
    case Mnemonic::Bne:
      return {in.rs, in.rt};
    case Mnemonic::Sll:
      return {std::nullopt, in.rt};
    case Mnemonic::Addi:
    case Mnemonic::Lw:
    case Mnemonic::Lklw:
    case Mnemonic::Lkuw:
      return {in.rs, std::nullopt};
    case Mnemonic::J:
    case Mnemonic::Crypt:
      return {};
  }
  return {};
}

std::uint32_t alu(AluOp op, std::uint32_t a, std::uint32_t b,
                  std::uint8_t shamt) {
  switch (op) {
    case AluOp::None: return 0;
    case AluOp::Add: return a + b;
    case AluOp::Sub: return a - b;
    case AluOp::And: return a & b;
    case AluOp::Or: return a | b;
    case AluOp::Slt:
      return static_cast<std::int32_t>(a) < static_cast<std::int32_t>(b) ? 1 : 0;
    case AluOp::Sll: return b << (shamt & 31);
  }
  return 0;
}

FetchResult fetch(const Memory& imem, std::uint32_t pc, bool decrypt,
                  const KeyRegister& key) {
  if (pc >= imem.extent()) return {};
  Block64 block = imem.read_block(pc);
  if (decrypt) {
    if (!key.complete()) {
      throw Fault(Fault::Kind::KeyNotLoadedOnFetch, pc,
                  "crypt mode is on but the key register is incomplete");
    }
    block = decrypt_block(block, KeySchedule(DesKey{key.value()}));
  }
  return {block_payload(block), decrypt};
}

MemOutcome mem_stage(const ExMem& in, const KeyRegister& key,
                     const Memory& dmem) {
  MemOutcome out;
  out.writeback = MemWb{in.state, in.pc, in.word, in.instr, in.ctl, in.alu_result};
  if (in.state != SlotState::Valid) return out;

  const std::uint32_t addr = in.alu_result;
  try {
    if (in.ctl.mem_read) {
      Block64 block = dmem.read_block(addr);
      if (in.decrypt_load) {
        if (!key.complete()) {
          throw Fault(Fault::Kind::KeyNotLoadedOnLoad, in.pc,
                      "decrypting load without a complete key");
        }
        block = decrypt_block(block, KeySchedule(DesKey{key.value()}));
      }
      out.writeback.value = block_payload(block);
    }
    if (in.ctl.key_load != KeyHalf::None) {
      out.key_half = in.ctl.key_load;
      out.key_value = block_payload(dmem.read_block(addr));
    }
    if (in.ctl.mem_write) {
      if (addr % Memory::kBlockBytes) throw UnalignedAccess(addr);
      Block64 block = pad_word(in.store_data);
      if (in.encrypt_store) {
        if (!key.complete()) {
          throw Fault(Fault::Kind::KeyNotLoadedOnStore, in.pc,
                      "crypt mode is on but the key register is incomplete");
        }
        block = encrypt_block(block, KeySchedule(DesKey{key.value()}));
        out.encrypted_store = true;
      }
      out.store = std::pair{addr, block};
    }
  } catch (const UnalignedAccess& e) {
    throw Fault(Fault::Kind::UnalignedAccess, in.pc, e.what());
  }
  return out;
}

ForwardSource forward_select(std::uint8_t reg, const ExMem& exmem,
                             const MemWb& memwb) {
  if (reg == 0) return ForwardSource::RegisterFile;
  // A load in EX/MEM has no value yet; the hazard unit keeps its consumers
  // out of EX until it reaches MEM/WB.
  if (exmem.state == SlotState::Valid && exmem.ctl.reg_write &&
      !exmem.ctl.mem_read && exmem.ctl.dest == reg) {
    return ForwardSource::ExMem;
  }
  if (memwb.state == SlotState::Valid && memwb.ctl.reg_write &&
      memwb.ctl.dest == reg) {
    return ForwardSource::MemWb;
  }
  return ForwardSource::RegisterFile;
}

HazardSignals detect_hazards(const Instruction& in_id, const IdEx& idex,
                             const ExMem& exmem) {
  const Sources src = sources_of(in_id);
  HazardSignals h;
  if (idex.state == SlotState::Valid && idex.ctl.mem_read &&
      src.reads(idex.ctl.dest)) {
    h.stall = true;
  }
  if (is_branch(in_id.mnemonic)) {
    if (idex.state == SlotState::Valid && idex.ctl.reg_write &&
        src.reads(idex.ctl.dest)) {
      h.stall = true;
    }
    if (exmem.state == SlotState::Valid && exmem.ctl.mem_read &&
        src.reads(exmem.ctl.dest)) {
      h.stall = true;
    }
  }
  return h;
}

BranchDecision resolve_branch(const Instruction& in, std::uint32_t pc,
                              std::uint32_t rs_value, std::uint32_t rt_value) {
  switch (in.mnemonic) {
    case Mnemonic::J:
      return {true, in.target * 8u};
    case Mnemonic::Beq:
    case Mnemonic::Bne: {
      const bool equal = rs_value == rt_value;
      const bool taken = in.mnemonic == Mnemonic::Beq ? equal : !equal;
      const std::uint32_t target =
          pc + 8 + static_cast<std::uint32_t>(in.simm()) * 8u;
      return {taken, taken ? target : 0};
    }
    default:
      return {};
  }
}

std::string format_trace(const CycleEvents& ev) {
  std::string events;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!events.empty()) events += ' ';
    events += name;
  };
  add(ev.stall, "STALL");
  add(ev.flush, "FLUSH");
  add(ev.crypt_on, "CRYPT_ON");
  add(ev.crypt_off, "CRYPT_OFF");
  add(ev.decrypted_fetch, "DEC_FETCH");
  add(ev.encrypted_store, "ENC_STORE");
  if (events.empty()) events = "-";
  return fmt::format("{} | {:08x} | IF:{}  ID:{}  EX:{}  MEM:{}  WB:{} | events: {}",
                     ev.cycle, ev.pc, render(ev.if_stage), render(ev.id_stage),
                     render(ev.ex_stage), render(ev.mem_stage),
                     render(ev.wb_stage), events);
}

Pipeline::Pipeline(RunOptions options) : options_(options) {}

Pipeline::Pipeline(CpuState state, RunOptions options)
    : state_(std::move(state)), options_(options) {}

CycleEvents Pipeline::step() {
  CpuState& s = state_;
  CycleEvents ev;
  ev.cycle = s.stats.cycles + 1;
  ev.pc = s.pc;
  if (halted_) {
    ev.halted = true;
    return ev;
  }

  // WB. The write lands before ID reads the register file this cycle.
  ev.wb_stage = view_of(s.memwb);
  const bool retire = s.memwb.state == SlotState::Valid;
  std::optional<std::pair<std::uint8_t, std::uint32_t>> wb_write;
  if (retire && s.memwb.ctl.reg_write && s.memwb.ctl.dest != 0) {
    wb_write = std::pair{s.memwb.ctl.dest, s.memwb.value};
  }
  auto read_reg = [&](std::uint8_t r) {
    if (wb_write && wb_write->first == r) return wb_write->second;
    return s.regs.read(r);
  };

  // MEM
  ev.mem_stage = view_of(s.exmem);
  const MemOutcome mem = mem_stage(s.exmem, s.key, s.dmem);
  ev.encrypted_store = mem.encrypted_store;

  // EX
  ev.ex_stage = view_of(s.idex);
  ExMem next_exmem;
  next_exmem.state = s.idex.state;
  if (s.idex.state == SlotState::Valid) {
    const IdEx& x = s.idex;
    const Sources src = sources_of(x.instr);
    auto operand = [&](std::optional<std::uint8_t> reg, std::uint32_t latched) {
      if (!reg) return latched;
      switch (forward_select(*reg, s.exmem, s.memwb)) {
        case ForwardSource::ExMem: return s.exmem.alu_result;
        case ForwardSource::MemWb: return s.memwb.value;
        case ForwardSource::RegisterFile: return latched;
      }
      return latched;
    };
    const std::uint32_t a = operand(src.first, x.rs_value);
    const std::uint32_t b_reg = operand(src.second, x.rt_value);
    const std::uint32_t b = x.ctl.alu_imm ? x.imm : b_reg;
    next_exmem.pc = x.pc;
    next_exmem.word = x.word;
    next_exmem.instr = x.instr;
    next_exmem.ctl = x.ctl;
    next_exmem.alu_result = alu(x.ctl.alu, a, b, x.instr.shamt);
    next_exmem.store_data = b_reg;
    next_exmem.encrypt_store = x.encrypt_store;
    next_exmem.decrypt_load = x.decrypt_load;
  }

  // ID
  ev.id_stage = view_of(s.ifid);
  IdEx next_idex;
  bool stall = false;
  std::optional<std::uint32_t> redirect;
  std::optional<bool> next_crypt;
  if (s.ifid.state == SlotState::End) {
    next_idex.state = SlotState::End;
  } else if (s.ifid.state == SlotState::Valid) {
    const auto decoded = try_decode(s.ifid.word);
    if (!decoded) {
      throw Fault(Fault::Kind::UnknownInstruction, s.ifid.pc,
                  fmt::format("word {:08x}{}", s.ifid.word,
                              s.ifid.decrypted ? " (after decryption)" : ""));
    }
    const Instruction& in = *decoded;
    stall = detect_hazards(in, s.idex, s.exmem).stall;
    if (!stall) {
      next_idex.state = SlotState::Valid;
      next_idex.pc = s.ifid.pc;
      next_idex.word = s.ifid.word;
      next_idex.instr = in;
      next_idex.ctl = control_for(in);
      next_idex.rs_value = read_reg(in.rs);
      next_idex.rt_value = read_reg(in.rt);
      next_idex.imm = static_cast<std::uint32_t>(in.simm());
      next_idex.encrypt_store = s.crypt_mode;
      next_idex.decrypt_load = s.crypt_mode && options_.decrypt_loads;

      if (in.mnemonic == Mnemonic::J || is_branch(in.mnemonic)) {
        // Branch comparison sees the register file plus EX/MEM results.
        auto compare_value = [&](std::uint8_t r) {
          if (forward_select(r, s.exmem, MemWb{}) == ForwardSource::ExMem) {
            return s.exmem.alu_result;
          }
          return read_reg(r);
        };
        const BranchDecision bd = resolve_branch(
            in, s.ifid.pc, compare_value(in.rs), compare_value(in.rt));
        if (bd.taken) redirect = bd.target;
      } else if (in.mnemonic == Mnemonic::Crypt) {
        const bool want = in.target != 0;
        if (want != s.crypt_mode) {
          next_crypt = want;
          ev.crypt_on = want;
          ev.crypt_off = !want;
          // The slot behind crypt was fetched through the old path.
          if (options_.decrypt_fetch) redirect = s.ifid.pc + 8;
        }
      }
    }
  }

  // IF
  IfId next_ifid = s.ifid;
  std::uint32_t next_pc = s.pc;
  bool next_fetch_ended = s.fetch_ended;
  if (stall) {
    ev.stall = true;
    ev.if_stage.kind = StageView::Kind::Stalled;
  } else if (redirect) {
    ev.flush = true;
    ev.if_stage = {StageView::Kind::Squashed, s.pc, 0};
    next_ifid = IfId{};
    next_pc = *redirect;
  } else if (s.fetch_ended) {
    next_ifid = IfId{};
  } else {
    const bool decrypt = s.crypt_mode && options_.decrypt_fetch;
    const FetchResult fr = fetch(s.imem, s.pc, decrypt, s.key);
    if (!fr.word) {
      next_ifid = IfId{SlotState::End, s.pc, 0, false};
      next_fetch_ended = true;
      ev.if_stage.kind = StageView::Kind::End;
    } else {
      next_ifid = IfId{SlotState::Valid, s.pc, *fr.word, fr.decrypted};
      next_pc = s.pc + 8;
      ev.decrypted_fetch = fr.decrypted;
      ev.if_stage = {StageView::Kind::Instr, s.pc, *fr.word};
    }
  }

  // Commit: everything above read only the pre-cycle state.
  if (wb_write) s.regs.write(wb_write->first, wb_write->second);
  if (retire) {
    ++s.stats.retired;
    if (options_.record_retired) {
      retired_.push_back({s.memwb.pc, s.memwb.word});
    }
  }
  if (mem.store) s.dmem.write_block(mem.store->first, mem.store->second);
  if (mem.key_half == KeyHalf::Lower) s.key.set_lower(mem.key_value);
  if (mem.key_half == KeyHalf::Upper) s.key.set_upper(mem.key_value);

  s.memwb = mem.writeback;
  s.exmem = next_exmem;
  s.idex = stall ? IdEx{} : next_idex;
  s.ifid = next_ifid;
  s.pc = next_pc;
  s.fetch_ended = next_fetch_ended;
  if (next_crypt) s.crypt_mode = *next_crypt;

  ++s.stats.cycles;
  if (stall) ++s.stats.stalls;
  if (redirect) ++s.stats.flushes;
  if (ev.decrypted_fetch) ++s.stats.decrypted_fetches;
  if (ev.encrypted_store) ++s.stats.encrypted_stores;

  if (s.memwb.state == SlotState::End) {
    halted_ = true;
    ev.halted = true;
  }
  return ev;
}

RunResult Pipeline::run() {
  return run([](const CycleEvents&) {});
}

RunResult Pipeline::finish(RunStatus status, const Fault* fault) const {
  RunResult r;
  r.status = status;
  r.stats = state_.stats;
  r.retired = retired_;
  if (fault) {
    r.fault_message = fault->what();
    r.fault_kind = fault->kind();
  }
  return r;
}

}  // namespace emips
