#include "emips/hex_image.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>

namespace emips {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_hex(std::string_view s, T& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out, 16);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

const char* kind_name(HexFormatError::Kind k) {
  return k == HexFormatError::Kind::BadHexLine ? "bad hex line"
                                               : "unaligned address directive";
}

}  // namespace

HexFormatError::HexFormatError(Kind kind, std::size_t line,
                               const std::string& detail)
    : Error(fmt::format("line {}: {}: {}", line, kind_name(kind), detail)),
      kind_(kind),
      line_(line) {}

MemoryImage read_hex(std::string_view text) {
  MemoryImage image;
  std::uint64_t next = 0;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '@') {
      std::uint32_t addr = 0;
      if (!parse_hex(line.substr(1), addr)) {
        throw HexFormatError(HexFormatError::Kind::BadHexLine, line_no,
                             std::string(line));
      }
      if (addr % 8) {
        throw HexFormatError(HexFormatError::Kind::UnalignedAddressDirective,
                             line_no, std::string(line));
      }
      next = addr;
      continue;
    }

    std::uint64_t block = 0;
    if (line.size() != 16 || !parse_hex(line, block)) {
      throw HexFormatError(HexFormatError::Kind::BadHexLine, line_no,
                           std::string(line));
    }
    if (next > 0xFFFFFFF8u) {
      throw HexFormatError(HexFormatError::Kind::BadHexLine, line_no,
                           "block past the end of the address space");
    }
    image.blocks.push_back({static_cast<std::uint32_t>(next), block});
    next += 8;
  }
  return image;
}

std::string write_hex(const MemoryImage& image) {
  std::string out;
  std::uint64_t next = 0;
  for (const auto& pb : image.blocks) {
    if (pb.address != next) out += fmt::format("@{:x}\n", pb.address);
    out += fmt::format("{:016x}\n", pb.block);
    next = std::uint64_t{pb.address} + 8;
  }
  return out;
}

MemoryImage read_hex_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return read_hex(ss.str());
}

void write_hex_file(const std::string& path, const MemoryImage& image) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << write_hex(image);
}

}  // namespace emips
