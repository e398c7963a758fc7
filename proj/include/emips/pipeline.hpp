#pragma once

// Cycle-accurate five-stage pipeline (IF, ID, EX, MEM, WB).
//
//  * IF reads one 64-bit block per cycle from instruction memory and, while
//    crypt mode is on, passes it through the DES decryptor before extracting
//    the 32-bit payload. PC advances by 8.
//  * ID decodes, reads the register file (written earlier in the same cycle
//    by WB), runs the hazard unit, resolves beq/bne/j, and executes crypt:
//    a mode change squashes the slot in IF so it is refetched through the
//    other path.
//  * EX runs the ALU with EX/MEM and MEM/WB forwarding.
//  * MEM performs lw/sw and key loads. Stores issued in crypt mode are
//    DES-encrypted; lklw/lkuw write the key register at the end of MEM.
//  * WB writes the register file.
//
// Fetching past the end of instruction memory injects an end marker; the run
// halts cleanly once that marker reaches MEM/WB, so every halting run obeys
//   cycles == retired + stalls + flushes + 4.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emips/error.hpp"
#include "emips/isa.hpp"
#include "emips/machine.hpp"

namespace emips {

class Fault : public Error {
 public:
  enum class Kind {
    UnknownInstruction,
    UnalignedAccess,
    KeyNotLoadedOnFetch,
    KeyNotLoadedOnStore,
    KeyNotLoadedOnLoad,  // decrypting load (decrypt_loads) without a key
  };
  Fault(Kind kind, std::uint32_t pc, const std::string& detail);
  Kind kind() const { return kind_; }
  std::uint32_t pc() const { return pc_; }

 private:
  Kind kind_;
  std::uint32_t pc_;
};

const char* fault_kind_name(Fault::Kind kind);

enum class AluOp : std::uint8_t { None, Add, Sub, And, Or, Slt, Sll };
enum class KeyHalf : std::uint8_t { None, Lower, Upper };

struct Control {
  AluOp alu = AluOp::None;
  bool alu_imm = false;  // second ALU operand is the sign-extended immediate
  bool reg_write = false;
  bool mem_read = false;
  bool mem_write = false;
  KeyHalf key_load = KeyHalf::None;
  std::uint8_t dest = 0;

  bool operator==(const Control&) const = default;
};

Control control_for(const Instruction& in);

// Register sources the instruction reads in ID/EX (at most two).
struct Sources {
  std::optional<std::uint8_t> first;   // rs role
  std::optional<std::uint8_t> second;  // rt role
  bool reads(std::uint8_t r) const {
    return r != 0 && (first == r || second == r);
  }
};
Sources sources_of(const Instruction& in);

enum class SlotState : std::uint8_t { Bubble, Valid, End };

struct IfId {
  SlotState state = SlotState::Bubble;
  std::uint32_t pc = 0;
  std::uint32_t word = 0;
  bool decrypted = false;
};

struct IdEx {
  SlotState state = SlotState::Bubble;
  std::uint32_t pc = 0;
  std::uint32_t word = 0;
  Instruction instr;
  Control ctl;
  std::uint32_t rs_value = 0;
  std::uint32_t rt_value = 0;
  std::uint32_t imm = 0;  // sign-extended
  bool encrypt_store = false;
  bool decrypt_load = false;
};

struct ExMem {
  SlotState state = SlotState::Bubble;
  std::uint32_t pc = 0;
  std::uint32_t word = 0;
  Instruction instr;
  Control ctl;
  std::uint32_t alu_result = 0;
  std::uint32_t store_data = 0;
  bool encrypt_store = false;
  bool decrypt_load = false;
};

struct MemWb {
  SlotState state = SlotState::Bubble;
  std::uint32_t pc = 0;
  std::uint32_t word = 0;
  Instruction instr;
  Control ctl;
  std::uint32_t value = 0;
};

struct Stats {
  std::uint64_t cycles = 0;
  std::uint64_t retired = 0;
  std::uint64_t stalls = 0;
  std::uint64_t flushes = 0;
  std::uint64_t decrypted_fetches = 0;
  std::uint64_t encrypted_stores = 0;

  double cpi() const {
    return retired ? static_cast<double>(cycles) / static_cast<double>(retired)
                   : 0.0;
  }
  bool operator==(const Stats&) const = default;
};

struct RunOptions {
  std::uint64_t max_cycles = 100000;
  // Route lw through the MEM-stage decryptor while crypt mode is on.
  bool decrypt_loads = false;
  // When false, fetches never go through the decryptor and crypt does not
  // squash; used to run a plaintext image of an encrypted program.
  bool decrypt_fetch = true;
  bool record_retired = false;
};

struct RetiredInstruction {
  std::uint32_t pc = 0;
  std::uint32_t word = 0;
  bool operator==(const RetiredInstruction&) const = default;
};

struct CpuState {
  std::uint32_t pc = 0;
  bool crypt_mode = false;
  bool fetch_ended = false;  // end marker has left IF
  RegisterFile regs;
  KeyRegister key;
  Memory imem;
  Memory dmem;
  IfId ifid;
  IdEx idex;
  ExMem exmem;
  MemWb memwb;
  Stats stats;
};

// What each stage held during one cycle, plus the events it raised.
struct StageView {
  enum class Kind : std::uint8_t { Bubble, Instr, End, Squashed, Stalled };
  Kind kind = Kind::Bubble;
  std::uint32_t pc = 0;
  std::uint32_t word = 0;
};

struct CycleEvents {
  std::uint64_t cycle = 0;
  std::uint32_t pc = 0;  // fetch PC at the start of the cycle
  StageView if_stage, id_stage, ex_stage, mem_stage, wb_stage;
  bool stall = false;
  bool flush = false;
  bool crypt_on = false;
  bool crypt_off = false;
  bool decrypted_fetch = false;
  bool encrypted_store = false;
  bool halted = false;  // end marker reached MEM/WB this cycle
};

// "cycle | PC | IF:... ID:... EX:... MEM:... WB:... | events: ..."
std::string format_trace(const CycleEvents& ev);

// ---- stage helpers, exposed for unit testing ----

struct FetchResult {
  std::optional<std::uint32_t> word;  // nullopt: past the end of imem
  bool decrypted = false;
};
// Throws Fault(KeyNotLoadedOnFetch) when decryption is needed but the key
// register is incomplete.
FetchResult fetch(const Memory& imem, std::uint32_t pc, bool decrypt,
                  const KeyRegister& key);

struct MemOutcome {
  MemWb writeback;
  std::optional<std::pair<std::uint32_t, Block64>> store;  // address, block
  KeyHalf key_half = KeyHalf::None;
  std::uint32_t key_value = 0;
  bool encrypted_store = false;
};
// Pure: computes the stage's effects without applying them.
MemOutcome mem_stage(const ExMem& in, const KeyRegister& key,
                     const Memory& dmem);

enum class ForwardSource : std::uint8_t { RegisterFile, ExMem, MemWb };
ForwardSource forward_select(std::uint8_t reg, const ExMem& exmem,
                             const MemWb& memwb);

struct HazardSignals {
  bool stall = false;
};
// Load-use for ordinary instructions; for beq/bne additionally any producer
// in EX and any load in MEM, since branches resolve in ID.
HazardSignals detect_hazards(const Instruction& in_id, const IdEx& idex,
                             const ExMem& exmem);

struct BranchDecision {
  bool taken = false;
  std::uint32_t target = 0;
};
BranchDecision resolve_branch(const Instruction& in, std::uint32_t pc,
                              std::uint32_t rs_value, std::uint32_t rt_value);

std::uint32_t alu(AluOp op, std::uint32_t a, std::uint32_t b,
                  std::uint8_t shamt);

// ---- driver ----

enum class RunStatus { Halted, Fault, CycleLimit };

struct RunResult {
  RunStatus status = RunStatus::Halted;
  std::optional<std::string> fault_message;
  std::optional<Fault::Kind> fault_kind;
  Stats stats;
  std::vector<RetiredInstruction> retired;
};

class Pipeline {
 public:
  explicit Pipeline(RunOptions options = {});
  Pipeline(CpuState state, RunOptions options);

  void load_imem(const MemoryImage& image) { state_.imem.load(image); }
  void load_dmem(const MemoryImage& image) { state_.dmem.load(image); }

  // Advances one clock. Throws Fault; state is left as it was before the
  // faulting cycle.
  CycleEvents step();
  bool halted() const { return halted_; }

  // Steps until clean halt, fault or the cycle limit. `trace`, when given,
  // is called after every completed cycle.
  template <typename TraceFn>
  RunResult run(TraceFn&& trace);
  RunResult run();

  const CpuState& state() const { return state_; }
  CpuState& state() { return state_; }
  const RunOptions& options() const { return options_; }
  const std::vector<RetiredInstruction>& retired() const { return retired_; }

 private:
  RunResult finish(RunStatus status, const Fault* fault) const;

  CpuState state_;
  RunOptions options_;
  bool halted_ = false;
  std::vector<RetiredInstruction> retired_;
};

template <typename TraceFn>
RunResult Pipeline::run(TraceFn&& trace) {
  while (!halted_) {
    if (state_.stats.cycles >= options_.max_cycles) {
      return finish(RunStatus::CycleLimit, nullptr);
    }
    try {
      const CycleEvents ev = step();
      trace(ev);
    } catch (const Fault& f) {
      return finish(RunStatus::Fault, &f);
    }
  }
  return finish(RunStatus::Halted, nullptr);
}

}  // namespace emips
