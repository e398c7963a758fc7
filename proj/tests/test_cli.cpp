#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "support/harness.hpp"

namespace fs = std::filesystem;
using emips::cli::run_cli;
using emips::testing::program_path;
using emips::testing::slurp;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "emips_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string golden(const std::string& name) {
  return slurp(std::string(EMIPS_GOLDEN_DIR) + "/" + name);
}

std::string assemble_encrypted(const std::string& program) {
  const std::string hex = scratch(program + ".hex").string();
  const auto r = cli({"asm", program_path(program), "-o", hex, "--encrypt",
                      "--key", "4B4952415450414C"});
  REQUIRE(r.code == 0);
  return hex;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("des subcommand") {
  auto r = cli({"des", "encrypt", "--key", "133457799BBCDFF1", "--block",
                "0123456789ABCDEF"});
  CHECK(r.code == 0);
  CHECK(r.out == "85e813540f0ab405\n");
  r = cli({"des", "decrypt", "--key", "133457799bbcdff1", "--block",
           "85e813540f0ab405"});
  CHECK(r.out == "0123456789abcdef\n");
  r = cli({"des", "encrypt", "--key", "4B4952415450414C", "--block",
           "00000000CB97F7EE"});
  CHECK(r.out == "10539160018d5ff7\n");

  CHECK(cli({"des", "encrypt", "--key", "123", "--block", "0"}).code == 1);
  CHECK(cli({"des", "scramble", "--key", "133457799BBCDFF1", "--block",
             "0123456789ABCDEF"}).code == 1);
}

TEST_CASE("usage errors") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"--help"}).code == 0);
  const auto r = cli({"run", "--imem", scratch("missing.hex").string()});
  CHECK(r.code == 1);
  CHECK(r.err.starts_with("error: "));
}

TEST_CASE("asm reports layout and writes the image") {
  const std::string hex = scratch("plain.hex").string();
  const auto r = cli({"asm", program_path("array_sum.s"), "-o", hex});
  REQUIRE(r.code == 0);
  CHECK(r.out ==
        "blocks: 21\n"
        "crypt boundary: none\n"
        "symbols:\n"
        "  Exit 000000a0\n"
        "  Loop 00000058\n");
  const auto img = emips::read_hex_file(hex);
  CHECK(img == emips::testing::image_of(slurp(program_path("array_sum.s"))));

  const auto enc = cli({"asm", program_path("array_sum.s"), "-o",
                        scratch("enc.hex").string(), "--encrypt", "--key",
                        "4B4952415450414C"});
  CHECK(enc.out.starts_with("blocks: 21\ncrypt boundary: 7\n"));

  CHECK(cli({"asm", program_path("array_sum.s"), "--encrypt"}).code == 1);
  const fs::path bad = scratch("bad.s");
  { std::ofstream(bad) << "nop\nbogus $r1\n"; }
  const auto err = cli({"asm", bad.string()});
  CHECK(err.code == 1);
  CHECK(err.err.find("2") != std::string::npos);
}

TEST_CASE("run matches the golden output") {
  const std::string hex = assemble_encrypted("array_sum.s");
  const auto r = cli({"run", "--imem", hex, "--dmem",
                      program_path("array_sum_data.hex"), "--regs", "4",
                      "--mem", "56:64"});
  CHECK(r.code == 0);
  CHECK(r.out == golden("array_sum_run.txt"));
}

TEST_CASE("run trace goes to stderr") {
  const std::string hex = assemble_encrypted("array_sum.s");
  const auto r = cli({"run", "--imem", hex, "--dmem",
                      program_path("array_sum_data.hex"), "--trace", "--regs",
                      "none"});
  CHECK(r.code == 0);
  std::istringstream lines(r.err);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    ++count;
    CHECK(line.starts_with(std::to_string(count) + " | "));
  }
  CHECK(count == 100);
  CHECK(r.err.find("CRYPT_ON") != std::string::npos);
  CHECK(r.err.find("ENC_STORE") != std::string::npos);
  CHECK(r.out.find("registers:") == std::string::npos);
}

TEST_CASE("run exit codes") {
  const std::string hex = assemble_encrypted("array_sum_jloop.s");
  const auto r = cli({"run", "--imem", hex, "--dmem",
                      program_path("array_sum_data.hex"), "--max-cycles", "500"});
  CHECK(r.code == 3);
  CHECK(r.out.starts_with("status: cycle-limit\ncycles: 500\n"));

  const fs::path plain = scratch("unaligned.s");
  { std::ofstream(plain) << "lw $r1, 4($r0)\n"; }
  const std::string img = scratch("unaligned.hex").string();
  REQUIRE(cli({"asm", plain.string(), "-o", img}).code == 0);
  const auto f = cli({"run", "--imem", img});
  CHECK(f.code == 2);
  CHECK(f.err.starts_with("fault: "));
}

TEST_CASE("dump decrypts and disassembles") {
  const std::string hex = assemble_encrypted("array_sum.s");
  const auto r = cli({"dump", hex, "--key", "4B4952415450414C", "--disasm"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("00000058: 0000000000422820  add $r5, $r2, $r2") !=
        std::string::npos);
  CHECK(r.out.find("000000a0: 00000000ac040038  sw $r4, 56($r0)") !=
        std::string::npos);
  const auto raw = cli({"dump", hex});
  CHECK(raw.out.find("00000030: 0000000070000001") != std::string::npos);
  CHECK(raw.out.find("000000a0: 00000000ac040038") == std::string::npos);
}

}  // TEST_SUITE
