#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gandalf/asm.hpp"
#include "gandalf/machine.hpp"
#include "gandalf/minig/ast.hpp"

namespace gandalf::minig {

class CompileError : public std::runtime_error {
 public:
  CompileError(SourcePos pos, const std::string& message)
      : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message),
        pos_(pos) {}
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

enum class BlockKind { System, Scalars, Array, Pointer };

const char* to_string(BlockKind kind);

/// One contiguous region of a stack frame. Offsets are relative to the
/// frame's stack pointer (r1 after allocation).
struct FrameBlock {
  std::string name;
  BlockKind kind = BlockKind::Scalars;
  /// -1 when the frame has no headers (uninstrumented build).
  std::int32_t header_offset = -1;
  std::int32_t data_offset = 0;
  std::uint32_t size = 0;
};

struct FrameLayout {
  std::string function;
  bool gandalf = false;
  /// Low to high address: pointer blocks, arrays, frame scalars, system block.
  std::vector<FrameBlock> blocks;
  std::uint32_t frame_size = 0;
  /// Offset of the first frame-scalar word; the frame pointer r2 points here.
  std::int32_t fp_offset = 0;
  /// Scalar name -> byte offset from r2. Includes parameters and the hidden
  /// call-result slots ("$call0", ...).
  std::map<std::string, std::int32_t> scalar_slots;
  /// Pointer/array name -> index into `blocks`.
  std::map<std::string, std::size_t> block_index;

  std::uint32_t header_bytes() const;
  std::uint32_t data_bytes() const;
  const FrameBlock& system_block() const { return blocks.back(); }
  const FrameBlock* find_block(const std::string& name) const;
};

/// Computes the frame of `fn`. Throws CompileError on duplicate names or a
/// frame that does not fit the 16-bit displacement range.
FrameLayout layout_frame(const Function& fn, bool gandalf);

/// Header-population sequence for the given frame: MTSPR(18,1), three stores
/// per block (magic = own address, base = data_start - 1, bound = data_start
/// + size), MTSPR(18,0). Addresses are formed from r1 with r12/r10 scratch.
std::vector<assembly::AsmInsn> emit_prologue(const FrameLayout& layout);

struct FunctionInfo {
  std::string name;
  FrameLayout layout;
  std::size_t instrumented_count = 0;
  std::size_t plain_count = 0;
};

struct CompileOutput {
  assembly::AsmProgram program;
  bool gandalf = false;
  std::vector<FunctionInfo> functions;
  std::size_t instrumented_count = 0;
  std::size_t plain_count = 0;
  /// Instructions present only because of the fixed per-program and
  /// per-function instrumentation (GEB enable, PHWE bracket, system block).
  std::size_t boilerplate_count = 0;

  /// instrumented / plain - 1.
  double size_bloat() const;
  const FunctionInfo* find_function(const std::string& name) const;
};

/// Compiles `program` to assembly. Both variants are generated so that the
/// static instruction counts of each are always available.
CompileOutput compile(const Program& program, bool gandalf);

/// parse + compile.
CompileOutput compile_source(std::string_view source, bool gandalf);

}  // namespace gandalf::minig
