#pragma once

// Single-cycle reference interpreter: one instruction per step, no pipeline,
// no fetch decryption. Architectural semantics match Pipeline, which makes
// it the oracle for differential tests.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emips/machine.hpp"
#include "emips/pipeline.hpp"

namespace emips {

struct InterpreterOptions {
  std::uint64_t max_steps = 1000000;
  bool decrypt_loads = false;
  bool record_retired = false;
};

struct InterpreterResult {
  RunStatus status = RunStatus::Halted;
  std::optional<std::string> fault_message;
  std::optional<Fault::Kind> fault_kind;
  RegisterFile regs;
  KeyRegister key;
  Memory dmem;
  bool crypt_mode = false;
  std::uint64_t steps = 0;
  std::vector<RetiredInstruction> retired;
};

// `imem` must hold plaintext instructions.
InterpreterResult reference_interpret(const Memory& imem, Memory dmem,
                                      const InterpreterOptions& options = {});

}  // namespace emips
