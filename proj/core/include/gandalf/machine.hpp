#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gandalf/memory.hpp"

namespace gandalf {

using Word = std::uint32_t;

inline constexpr unsigned kNumRegs = 32;
inline constexpr unsigned kRegZero = 0;
inline constexpr unsigned kRegSp = 1;
inline constexpr unsigned kRegFp = 2;
inline constexpr unsigned kRegLink = 9;
inline constexpr unsigned kRegRet = 11;

/// SPR bit positions used by the protection extension.
inline constexpr unsigned kSprGeb = 17;
inline constexpr unsigned kSprPhwe = 18;

/// Code is loaded here; the null page stays unmapped (reads as zero).
inline constexpr Word kCodeBase = 0x00001000;
inline constexpr Word kDefaultStackTop = 0x80100000;

class DecodeError : public std::runtime_error {
 public:
  explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

class RangeError : public std::runtime_error {
 public:
  explicit RangeError(const std::string& what) : std::runtime_error(what) {}
};

class ImageFormatError : public std::runtime_error {
 public:
  explicit ImageFormatError(const std::string& what)
      : std::runtime_error(what) {}
};

enum class Opcode : std::uint8_t {
  // register-register ALU
  Add, Sub, And, Or, Shl, Mul,
  // register-immediate ALU (imm16 sign-extended)
  AddI, SubI, AndI, OrI, ShlI, MulI,
  Load,    // rd <- [ra + imm]
  Store,   // [ra + imm] <- rb
  LoadX,   // rd <- [ra + rb]; ra is the object base
  StoreX,  // [ra + rb] <- rd; ra is the object base
  MtSpr,   // spr[bit] <- imm (0/1)
  MfSpr,   // rd <- spr[bit]
  Beq, Bne, Blt,
  Jal,
  Jalr,
  Halt,
};

/// Decoded machine instruction. Unused fields are zero so that equality is
/// structural and decode(encode(i)) == i holds exactly.
///
/// Field roles per opcode:
///   ALU      rd, ra, rb
///   ALUI     rd, ra, imm
///   Load     rd (destination), ra (base), imm
///   Store    rb (source), ra (base), imm
///   LoadX    rd (destination), ra (object base), rb (byte index)
///   StoreX   rd (source), ra (object base), rb (byte index)
///   MtSpr    spr bit in `spr`, value bit in imm
///   MfSpr    rd, spr bit in `spr`
///   Branch   ra, rb, imm = offset in instructions from the branch
///   Jal      imm = absolute target word index
///   Jalr     ra
struct Instruction {
  Opcode op = Opcode::Halt;
  std::uint8_t rd = 0;
  std::uint8_t ra = 0;
  std::uint8_t rb = 0;
  std::uint8_t spr = 0;
  std::int32_t imm = 0;

  friend bool operator==(const Instruction&, const Instruction&) = default;

  static Instruction alu(Opcode op, unsigned rd, unsigned ra, unsigned rb);
  static Instruction alui(Opcode op, unsigned rd, unsigned ra, std::int32_t imm);
  static Instruction load(unsigned rd, unsigned ra, std::int32_t imm);
  static Instruction store(unsigned ra, std::int32_t imm, unsigned rb);
  static Instruction loadx(unsigned rd, unsigned ra, unsigned rindex);
  static Instruction storex(unsigned ra, unsigned rindex, unsigned rsrc);
  static Instruction mtspr(unsigned bit, bool value);
  static Instruction mfspr(unsigned rd, unsigned bit);
  static Instruction branch(Opcode op, unsigned ra, unsigned rb, std::int32_t offset);
  static Instruction jal(std::uint32_t target_index);
  static Instruction jalr(unsigned ra);
  static Instruction halt();
};

bool is_alu(Opcode op);
bool is_alui(Opcode op);
bool is_branch(Opcode op);
bool is_memory(Opcode op);
bool is_store(Opcode op);

/// Textual mnemonic ("add", "lw", "mtspr", ...).
const char* mnemonic(Opcode op);

/// Throws RangeError if an immediate or register field does not fit.
Word encode(const Instruction& insn);

/// Throws DecodeError for unassigned opcodes, nonzero reserved bits, or SPR
/// bits other than GEB/PHWE.
Instruction decode(Word word);

/// Assembly rendering in the syntax accepted by the assembler. Jump targets
/// print as absolute hex addresses.
std::string disassemble(const Instruction& insn);

/// rA contents plus sign-extended displacement, modulo 2^32.
constexpr Word effective_address(Word base_value, std::int16_t imm) {
  return base_value + static_cast<Word>(static_cast<std::int32_t>(imm));
}

struct SprFlags {
  bool geb = false;
  bool phwe = false;

  friend bool operator==(const SprFlags&, const SprFlags&) = default;
};

enum class TrapKind { Mismatch, DecodeError, AlignmentError };

const char* to_string(TrapKind kind);

struct TrapRecord {
  TrapKind kind = TrapKind::Mismatch;
  Word pc = 0;
  Word effective_address = 0;
  /// For mismatches: "bad-magic", "below-base" or "above-bound".
  std::string reason;
  /// Base register value used to locate the header (memory traps only).
  Word object_base = 0;
  std::string detail;
};

struct MachineState {
  std::array<Word, kNumRegs> regs{};
  Word pc = 0;
  SprFlags spr;
  Memory mem;
  std::uint64_t cycles = 0;
  std::uint64_t instructions = 0;
  std::optional<TrapRecord> trap;

  Word reg(unsigned r) const { return r == kRegZero ? 0 : regs[r]; }
  void set_reg(unsigned r, Word v) {
    if (r != kRegZero) regs[r] = v;
  }
};

/// Flat program image: entry PC, initial stack pointer, then code words that
/// load at kCodeBase. Serialized as big-endian 32-bit words.
struct Image {
  Word entry = kCodeBase;
  Word initial_sp = kDefaultStackTop;
  std::vector<Word> code;

  friend bool operator==(const Image&, const Image&) = default;
};

std::vector<std::uint8_t> serialize_image(const Image& image);
Image parse_image(std::span<const std::uint8_t> bytes);

Image read_image_file(const std::string& path);
void write_image_file(const Image& image, const std::string& path);

/// Fresh machine with the image's code mapped and pc/sp initialized.
MachineState load_image(const Image& image);

}  // namespace gandalf
