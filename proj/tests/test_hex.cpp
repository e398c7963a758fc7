#include <doctest.h>

#include <random>

#include "emips/assembler.hpp"
#include "emips/hex_image.hpp"
#include "support/harness.hpp"

using namespace emips;

TEST_SUITE("hex") {

TEST_CASE("read single block") {
  const MemoryImage img = read_hex("0000000000000000");
  REQUIRE(img.blocks.size() == 1);
  CHECK(img.blocks[0] == PlacedBlock{0, 0});
}

TEST_CASE("address directive and comments") {
  const MemoryImage img = read_hex(
      "# key area\n"
      "@68\n"
      "000000005450414C   # lower\n"
      "000000004b495241\n"
      "@0\n"
      "  00000000CBA767EE\n");
  REQUIRE(img.blocks.size() == 3);
  CHECK(img.blocks[0] == PlacedBlock{104, 0x5450414Cu});
  CHECK(img.blocks[1] == PlacedBlock{112, 0x4B495241u});
  CHECK(img.blocks[2] == PlacedBlock{0, 0xCBA767EEu});
}

TEST_CASE("format errors") {
  auto kind_of = [](std::string_view text) {
    try {
      read_hex(text);
    } catch (const HexFormatError& e) {
      return std::pair{e.kind(), e.line()};
    }
    FAIL("expected HexFormatError");
    return std::pair{HexFormatError::Kind::BadHexLine, std::size_t{0}};
  };
  CHECK(kind_of("000000000000000") ==
        std::pair{HexFormatError::Kind::BadHexLine, std::size_t{1}});
  CHECK(kind_of("0\n00000000000000g0") ==
        std::pair{HexFormatError::Kind::BadHexLine, std::size_t{1}});
  CHECK(kind_of("0000000000000000\n00000000000000g0") ==
        std::pair{HexFormatError::Kind::BadHexLine, std::size_t{2}});
  CHECK(kind_of("@69") ==
        std::pair{HexFormatError::Kind::UnalignedAddressDirective, std::size_t{1}});
  CHECK(kind_of("@zz") ==
        std::pair{HexFormatError::Kind::BadHexLine, std::size_t{1}});
  CHECK(kind_of("0x00000000000000") ==
        std::pair{HexFormatError::Kind::BadHexLine, std::size_t{1}});
}

TEST_CASE("canonical round trip") {
  const DesKey key{0x4B4952415450414CULL};
  const ProgramImage enc = encrypt_image(
      make_image(assemble_source(emips::testing::slurp(
          emips::testing::program_path("array_sum.s")))),
      key);
  const std::string text = write_hex(enc.to_memory_image());
  CHECK(read_hex(text) == enc.to_memory_image());
  CHECK(write_hex(read_hex(text)) == text);

  std::mt19937_64 rng(4);
  for (int n = 0; n < 100; ++n) {
    MemoryImage img;
    std::uint32_t addr = 8 * static_cast<std::uint32_t>(rng() % 16);
    for (int k = 0; k < 20; ++k) {
      img.blocks.push_back({addr, rng()});
      addr += rng() % 3 == 0 ? 8 * static_cast<std::uint32_t>(1 + rng() % 50) : 8;
    }
    const std::string t = write_hex(img);
    REQUIRE(read_hex(t) == img);
    REQUIRE(write_hex(read_hex(t)) == t);
  }
}

}  // TEST_SUITE
