#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "emips/assembler.hpp"
#include "emips/interpreter.hpp"
#include "emips/machine.hpp"
#include "emips/pipeline.hpp"

namespace emips::testing {

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string program_path(const std::string& name) {
  return std::string(EMIPS_PROGRAMS_DIR) + "/" + name;
}

inline Memory memory_of(const MemoryImage& image) {
  Memory m;
  m.load(image);
  return m;
}

inline MemoryImage image_of(const std::string& source) {
  return make_image(assemble_source(source)).to_memory_image();
}

struct PipelineRun {
  RunResult result;
  CpuState state;
};

inline PipelineRun run_pipeline(const MemoryImage& imem, const MemoryImage& dmem,
                                RunOptions opts = {}) {
  Pipeline cpu(opts);
  cpu.load_imem(imem);
  cpu.load_dmem(dmem);
  RunResult r = cpu.run();
  return {std::move(r), cpu.state()};
}

inline PipelineRun run_source(const std::string& source,
                              const MemoryImage& dmem = {},
                              RunOptions opts = {}) {
  return run_pipeline(image_of(source), dmem, opts);
}

}  // namespace emips::testing
