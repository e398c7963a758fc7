#pragma once

// Text image format shared by instruction and data memories:
//
//   # comment                 '#' starts a comment anywhere on a line
//   @68                       next block goes to byte address 0x68 (8-aligned)
//   000000005450414c          one 64-bit block, exactly 16 hex digits
//
// Blocks without a preceding directive follow the previous block (+8),
// starting at address 0.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "emips/block.hpp"
#include "emips/error.hpp"

namespace emips {

struct PlacedBlock {
  std::uint32_t address = 0;
  Block64 block = 0;
  bool operator==(const PlacedBlock&) const = default;
};

// Blocks in file order. Later entries at the same address win on load.
struct MemoryImage {
  std::vector<PlacedBlock> blocks;
  bool operator==(const MemoryImage&) const = default;
};

class HexFormatError : public Error {
 public:
  enum class Kind { BadHexLine, UnalignedAddressDirective };
  HexFormatError(Kind kind, std::size_t line, const std::string& detail);
  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

MemoryImage read_hex(std::string_view text);
std::string write_hex(const MemoryImage& image);

MemoryImage read_hex_file(const std::string& path);
void write_hex_file(const std::string& path, const MemoryImage& image);

}  // namespace emips
