#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "emips/assembler.hpp"
#include "emips/des.hpp"
#include "emips/hex_image.hpp"
#include "emips/machine.hpp"
#include "emips/pipeline.hpp"

namespace emips::cli {
namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

std::uint64_t parse_hex64(std::string_view s, const char* what) {
  if (s.starts_with("0x") || s.starts_with("0X")) s.remove_prefix(2);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (s.size() != 16 || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw UsageError(fmt::format("{} must be 16 hex digits, got '{}'", what, s));
  }
  return v;
}

std::uint64_t parse_number(std::string_view s, const char* what) {
  int base = 10;
  if (s.starts_with("0x") || s.starts_with("0X")) {
    base = 16;
    s.remove_prefix(2);
  }
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw UsageError(fmt::format("bad {} '{}'", what, s));
  }
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- asm ----

struct AsmArgs {
  std::string source;
  std::string output;
  bool encrypt = false;
  std::string key;
  bool auto_nop = false;
};

int cmd_asm(const AsmArgs& a, std::ostream& out) {
  if (a.encrypt && a.key.empty()) throw UsageError("--encrypt requires --key");
  std::optional<DesKey> key;
  if (!a.key.empty()) key = DesKey{parse_hex64(a.key, "--key")};

  const Assembly assembly = assemble_source(read_file(a.source), a.auto_nop);
  ProgramImage image = make_image(assembly);
  if (a.encrypt) image = encrypt_image(std::move(image), *key);

  std::string output = a.output;
  if (output.empty()) {
    output = std::filesystem::path(a.source).replace_extension(".hex").string();
  }
  write_hex_file(output, image.to_memory_image());

  fmt::print(out, "blocks: {}\n", image.blocks.size());
  if (image.crypt_boundary) {
    fmt::print(out, "crypt boundary: {}\n", *image.crypt_boundary);
  } else {
    fmt::print(out, "crypt boundary: none\n");
  }
  fmt::print(out, "symbols:\n");
  for (const auto& [name, addr] : image.symbols) {
    fmt::print(out, "  {} {:08x}\n", name, addr);
  }
  return kOk;
}

// ---- run ----

struct RunArgs {
  std::string imem;
  std::string dmem;
  std::uint64_t max_cycles = 100000;
  bool trace = false;
  bool decrypt_loads = false;
  std::string regs = "all";
  std::vector<std::string> mem;
};

std::vector<unsigned> parse_register_list(const std::string& spec) {
  std::vector<unsigned> out;
  if (spec == "none") return out;
  if (spec == "all") {
    for (unsigned i = 0; i < kNumRegisters; ++i) out.push_back(i);
    return out;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string_view v = item;
    if (v.starts_with("$")) v.remove_prefix(1);
    if (v.starts_with("r") || v.starts_with("R")) v.remove_prefix(1);
    const auto idx = parse_number(v, "register");
    if (idx >= kNumRegisters) throw UsageError("register out of range: " + item);
    out.push_back(static_cast<unsigned>(idx));
  }
  return out;
}

std::pair<std::uint32_t, std::uint32_t> parse_range(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw UsageError("memory range must be START:END, got '" + spec + "'");
  }
  const auto begin = parse_number(std::string_view(spec).substr(0, colon), "range start");
  const auto end = parse_number(std::string_view(spec).substr(colon + 1), "range end");
  if (end <= begin || end > 0x100000000ull) {
    throw UsageError("empty or oversized memory range '" + spec + "'");
  }
  return {static_cast<std::uint32_t>(begin),
          static_cast<std::uint32_t>(end > 0xFFFFFFFFull ? 0xFFFFFFFFull : end)};
}

const char* status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Halted: return "halted";
    case RunStatus::Fault: return "fault";
    case RunStatus::CycleLimit: return "cycle-limit";
  }
  return "?";
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  if (a.max_cycles < 1) throw UsageError("--max-cycles must be at least 1");
  const auto regs = parse_register_list(a.regs);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> ranges;
  for (const auto& m : a.mem) ranges.push_back(parse_range(m));

  RunOptions opts;
  opts.max_cycles = a.max_cycles;
  opts.decrypt_loads = a.decrypt_loads;
  Pipeline cpu(opts);
  cpu.load_imem(read_hex_file(a.imem));
  if (!a.dmem.empty()) cpu.load_dmem(read_hex_file(a.dmem));

  const RunResult result = a.trace ? cpu.run([&](const CycleEvents& ev) {
    err << format_trace(ev) << '\n';
  })
                                   : cpu.run();
  if (result.fault_message) fmt::print(err, "fault: {}\n", *result.fault_message);
  if (result.status == RunStatus::CycleLimit) {
    fmt::print(err, "cycle limit of {} reached\n", a.max_cycles);
  }

  const Stats& st = result.stats;
  fmt::print(out, "status: {}\n", status_name(result.status));
  fmt::print(out, "cycles: {}\n", st.cycles);
  fmt::print(out, "retired: {}\n", st.retired);
  fmt::print(out, "stalls: {}\n", st.stalls);
  fmt::print(out, "flushes: {}\n", st.flushes);
  fmt::print(out, "decrypted fetches: {}\n", st.decrypted_fetches);
  fmt::print(out, "encrypted stores: {}\n", st.encrypted_stores);
  fmt::print(out, "cpi: {:.4f}\n", st.cpi());

  const CpuState& s = cpu.state();
  if (!regs.empty()) {
    fmt::print(out, "registers:\n");
    for (unsigned r : regs) dump_register(out, s.regs, r);
    dump_key(out, s.key);
    fmt::print(out, "crypt = {}\n", s.crypt_mode ? 1 : 0);
  }
  if (!ranges.empty()) {
    fmt::print(out, "memory:\n");
    for (const auto& [b, e] : ranges) dump_memory(out, s.dmem, b, e);
  }

  switch (result.status) {
    case RunStatus::Halted: return kOk;
    case RunStatus::Fault: return kFault;
    case RunStatus::CycleLimit: return kCycleLimit;
  }
  return kFault;
}

// ---- des ----

struct DesArgs {
  std::string mode;
  std::string key;
  std::string block;
};

int cmd_des(const DesArgs& a, std::ostream& out) {
  const DesKey key{parse_hex64(a.key, "--key")};
  const std::uint64_t block = parse_hex64(a.block, "--block");
  const std::uint64_t result =
      a.mode == "encrypt" ? des_encrypt(block, key) : des_decrypt(block, key);
  fmt::print(out, "{:016x}\n", result);
  return kOk;
}

// ---- dump ----

struct DumpArgs {
  std::string image;
  std::string key;
  std::optional<std::size_t> boundary;
  bool disasm = false;
};

std::optional<std::size_t> find_boundary(const MemoryImage& img) {
  for (std::size_t i = 0; i < img.blocks.size(); ++i) {
    const auto in = try_decode(block_payload(img.blocks[i].block));
    if (in && in->mnemonic == Mnemonic::Crypt && in->target != 0) return i + 1;
  }
  return std::nullopt;
}

int cmd_dump(const DumpArgs& a, std::ostream& out) {
  MemoryImage img = read_hex_file(a.image);
  if (!a.key.empty()) {
    const KeySchedule sched(DesKey{parse_hex64(a.key, "--key")});
    const auto boundary = a.boundary ? a.boundary : find_boundary(img);
    if (!boundary) throw UsageError("no crypt instruction; pass --boundary");
    for (std::size_t i = *boundary; i < img.blocks.size(); ++i) {
      img.blocks[i].block = decrypt_block(img.blocks[i].block, sched);
    }
  }
  for (const auto& pb : img.blocks) {
    if (a.disasm) {
      fmt::print(out, "{:08x}: {:016x}  {}\n", pb.address, pb.block,
                 disassemble_word(block_payload(pb.block)));
    } else {
      fmt::print(out, "{:08x}: {:016x}\n", pb.address, pb.block);
    }
  }
  return kOk;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Assembler, DES tool and cycle-accurate simulator for the "
               "encrypted MIPS pipeline"};
  app.require_subcommand(1);

  AsmArgs asm_args;
  auto* asm_cmd = app.add_subcommand("asm", "Assemble a source file into a hex image");
  asm_cmd->add_option("source", asm_args.source, "Assembly source")->required();
  asm_cmd->add_option("-o,--output", asm_args.output,
                      "Output image (default: source with .hex extension)");
  asm_cmd->add_flag("--encrypt", asm_args.encrypt,
                    "DES-encrypt every block after the crypt instruction");
  asm_cmd->add_option("--key", asm_args.key, "DES key, 16 hex digits");
  asm_cmd->add_flag("--auto-nop", asm_args.auto_nop,
                    "Insert nops between key loads and crypt where missing");

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run images on the pipeline");
  run_cmd->add_option("--imem", run_args.imem, "Instruction memory image")->required();
  run_cmd->add_option("--dmem", run_args.dmem, "Data memory image");
  run_cmd->add_option("--max-cycles", run_args.max_cycles, "Cycle limit")
      ->capture_default_str();
  run_cmd->add_flag("--trace", run_args.trace, "Per-cycle trace on stderr");
  run_cmd->add_flag("--decrypt-loads", run_args.decrypt_loads,
                    "Decrypt lw data while crypt mode is on");
  run_cmd->add_option("--regs", run_args.regs,
                      "Registers to dump: all, none, or a list like 4,7")
      ->capture_default_str();
  run_cmd->add_option("--mem", run_args.mem,
                      "Data memory byte range START:END to dump (repeatable)");

  DesArgs des_args;
  auto* des_cmd = app.add_subcommand("des", "Encrypt or decrypt one 64-bit block");
  des_cmd->add_option("mode", des_args.mode, "encrypt or decrypt")
      ->required()
      ->check(CLI::IsMember({"encrypt", "decrypt"}));
  des_cmd->add_option("--key", des_args.key, "DES key, 16 hex digits")->required();
  des_cmd->add_option("--block", des_args.block, "Block, 16 hex digits")->required();

  DumpArgs dump_args;
  auto* dump_cmd = app.add_subcommand("dump", "Print a hex image, optionally decrypted");
  dump_cmd->add_option("image", dump_args.image, "Hex image")->required();
  dump_cmd->add_option("--key", dump_args.key, "Decrypt blocks after crypt with this key");
  dump_cmd->add_option("--boundary", dump_args.boundary,
                       "Index of the first encrypted block");
  dump_cmd->add_flag("--disasm", dump_args.disasm, "Disassemble each block");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*asm_cmd) return cmd_asm(asm_args, out);
    if (*run_cmd) return cmd_run(run_args, out, err);
    if (*des_cmd) return cmd_des(des_args, out);
    if (*dump_cmd) return cmd_dump(dump_args, out);
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kUsage;
  }
  return kUsage;
}

}  // namespace emips::cli
