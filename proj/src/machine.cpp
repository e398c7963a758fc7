#include "emips/machine.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <stdexcept>

namespace emips {

std::uint32_t RegisterFile::read(unsigned index) const {
  if (index >= kNumRegisters) throw std::out_of_range("register index");
  return index == 0 ? 0 : regs_[index];
}

void RegisterFile::write(unsigned index, std::uint32_t value) {
  if (index >= kNumRegisters) throw std::out_of_range("register index");
  if (index != 0) regs_[index] = value;
}

void KeyRegister::set_lower(std::uint32_t v) {
  lower_ = v;
  lower_loaded_ = true;
}

void KeyRegister::set_upper(std::uint32_t v) {
  upper_ = v;
  upper_loaded_ = true;
}

std::uint64_t KeyRegister::value() const {
  if (!complete()) throw KeyNotLoaded();
  return std::uint64_t{upper_} << 32 | lower_;
}

std::optional<std::uint64_t> KeyRegister::try_value() const {
  if (!complete()) return std::nullopt;
  return value();
}

UnalignedAccess::UnalignedAccess(std::uint32_t address)
    : Error(fmt::format("unaligned memory access at byte address {} (0x{:x})",
                        address, address)),
      address_(address) {}

Block64 Memory::read_block(std::uint32_t address) const {
  if (address % kBlockBytes) throw UnalignedAccess(address);
  auto it = blocks_.find(address);
  return it == blocks_.end() ? 0 : it->second;
}

void Memory::write_block(std::uint32_t address, Block64 block) {
  if (address % kBlockBytes) throw UnalignedAccess(address);
  blocks_[address] = block;
  extent_ = std::max<std::uint64_t>(extent_, std::uint64_t{address} + kBlockBytes);
}

std::uint8_t Memory::read_byte(std::uint32_t address) const {
  const Block64 b = read_block(address & ~(kBlockBytes - 1));
  return static_cast<std::uint8_t>(b >> (8 * (address % kBlockBytes)));
}

void Memory::load(const MemoryImage& image) {
  for (const auto& pb : image.blocks) write_block(pb.address, pb.block);
}

bool Memory::operator==(const Memory& other) const {
  auto nonzero = [](const Memory& m, const Memory& o) {
    for (const auto& [addr, block] : m.blocks_) {
      if (o.read_block(addr) != block) return false;
    }
    return true;
  };
  return nonzero(*this, other) && nonzero(other, *this);
}

void dump_register(std::ostream& os, const RegisterFile& regs, unsigned index) {
  fmt::print(os, "$r{} = {:08x}\n", index, regs.read(index));
}

void dump_registers(std::ostream& os, const RegisterFile& regs) {
  for (unsigned i = 0; i < kNumRegisters; ++i) dump_register(os, regs, i);
}

void dump_key(std::ostream& os, const KeyRegister& key) {
  if (auto v = key.try_value()) {
    fmt::print(os, "key = {:016x}\n", *v);
  } else {
    fmt::print(os, "key = unset (lower {}, upper {})\n",
               key.lower_loaded() ? "loaded" : "empty",
               key.upper_loaded() ? "loaded" : "empty");
  }
}

void dump_memory(std::ostream& os, const Memory& mem, std::uint32_t begin,
                 std::uint32_t end) {
  if (end <= begin) return;
  const std::uint64_t last = end;
  for (std::uint64_t a = begin & ~std::uint32_t{7}; a < last;
       a += Memory::kBlockBytes) {
    const auto addr = static_cast<std::uint32_t>(a);
    fmt::print(os, "{:08x}: {:016x}\n", addr, mem.read_block(addr));
  }
}

}  // namespace emips
