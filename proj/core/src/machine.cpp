#include "gandalf/machine.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>

namespace gandalf {

namespace {

// 6-bit primary opcodes. 0x00 and 0x3F are deliberately unassigned so that
// zero-filled and all-ones words never decode.
enum : Word {
  kOpAdd = 0x01, kOpSub, kOpAnd, kOpOr, kOpShl, kOpMul,
  kOpAddI = 0x08, kOpSubI, kOpAndI, kOpOrI, kOpShlI, kOpMulI,
  kOpLoad = 0x10, kOpStore, kOpLoadX, kOpStoreX,
  kOpMtSpr = 0x14, kOpMfSpr,
  kOpBeq = 0x18, kOpBne, kOpBlt,
  kOpJal = 0x1C, kOpJalr,
  kOpHalt = 0x3E,
};

constexpr Word kPrimary[] = {
    kOpAdd,  kOpSub,    kOpAnd,   kOpOr,    kOpShl,    kOpMul,
    kOpAddI, kOpSubI,   kOpAndI,  kOpOrI,   kOpShlI,   kOpMulI,
    kOpLoad, kOpStore,  kOpLoadX, kOpStoreX, kOpMtSpr, kOpMfSpr,
    kOpBeq,  kOpBne,    kOpBlt,   kOpJal,   kOpJalr,   kOpHalt,
};
static_assert(std::size(kPrimary) == static_cast<std::size_t>(Opcode::Halt) + 1);

constexpr Word kJalTargetMask = (1u << 26) - 1;

Word primary(Opcode op) { return kPrimary[static_cast<std::size_t>(op)]; }

void check_reg(unsigned r) {
  if (r >= kNumRegs) throw RangeError("register r" + std::to_string(r) + " out of range");
}

void check_imm16(std::int32_t imm) {
  if (imm < -32768 || imm > 32767) {
    throw RangeError("immediate " + std::to_string(imm) + " does not fit in 16 bits");
  }
}

Word field_rd(unsigned r) { return Word{r} << 21; }
Word field_ra(unsigned r) { return Word{r} << 16; }
Word field_rb(unsigned r) { return Word{r} << 11; }
Word field_imm(std::int32_t imm) { return static_cast<Word>(imm) & 0xFFFF; }

std::int32_t sext16(Word w) { return static_cast<std::int16_t>(w & 0xFFFF); }

std::string hex(Word w) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", w);
  return buf;
}

}  // namespace

Instruction Instruction::alu(Opcode op, unsigned rd, unsigned ra, unsigned rb) {
  return {op, static_cast<std::uint8_t>(rd), static_cast<std::uint8_t>(ra),
          static_cast<std::uint8_t>(rb), 0, 0};
}
Instruction Instruction::alui(Opcode op, unsigned rd, unsigned ra, std::int32_t imm) {
  return {op, static_cast<std::uint8_t>(rd), static_cast<std::uint8_t>(ra), 0, 0, imm};
}
Instruction Instruction::load(unsigned rd, unsigned ra, std::int32_t imm) {
  return {Opcode::Load, static_cast<std::uint8_t>(rd), static_cast<std::uint8_t>(ra), 0, 0, imm};
}
Instruction Instruction::store(unsigned ra, std::int32_t imm, unsigned rb) {
  return {Opcode::Store, 0, static_cast<std::uint8_t>(ra), static_cast<std::uint8_t>(rb), 0, imm};
}
Instruction Instruction::loadx(unsigned rd, unsigned ra, unsigned rindex) {
  return {Opcode::LoadX, static_cast<std::uint8_t>(rd), static_cast<std::uint8_t>(ra),
          static_cast<std::uint8_t>(rindex), 0, 0};
}
Instruction Instruction::storex(unsigned ra, unsigned rindex, unsigned rsrc) {
  return {Opcode::StoreX, static_cast<std::uint8_t>(rsrc), static_cast<std::uint8_t>(ra),
          static_cast<std::uint8_t>(rindex), 0, 0};
}
Instruction Instruction::mtspr(unsigned bit, bool value) {
  return {Opcode::MtSpr, 0, 0, 0, static_cast<std::uint8_t>(bit), value ? 1 : 0};
}
Instruction Instruction::mfspr(unsigned rd, unsigned bit) {
  return {Opcode::MfSpr, static_cast<std::uint8_t>(rd), 0, 0, static_cast<std::uint8_t>(bit), 0};
}
Instruction Instruction::branch(Opcode op, unsigned ra, unsigned rb, std::int32_t offset) {
  return {op, 0, static_cast<std::uint8_t>(ra), static_cast<std::uint8_t>(rb), 0, offset};
}
Instruction Instruction::jal(std::uint32_t target_index) {
  return {Opcode::Jal, 0, 0, 0, 0, static_cast<std::int32_t>(target_index)};
}
Instruction Instruction::jalr(unsigned ra) {
  return {Opcode::Jalr, 0, static_cast<std::uint8_t>(ra), 0, 0, 0};
}
Instruction Instruction::halt() { return {}; }

bool is_alu(Opcode op) { return op >= Opcode::Add && op <= Opcode::Mul; }
bool is_alui(Opcode op) { return op >= Opcode::AddI && op <= Opcode::MulI; }
bool is_branch(Opcode op) { return op >= Opcode::Beq && op <= Opcode::Blt; }
bool is_memory(Opcode op) { return op >= Opcode::Load && op <= Opcode::StoreX; }
bool is_store(Opcode op) { return op == Opcode::Store || op == Opcode::StoreX; }

const char* mnemonic(Opcode op) {
  switch (op) {
    case Opcode::Add: return "add";
    case Opcode::Sub: return "sub";
    case Opcode::And: return "and";
    case Opcode::Or: return "or";
    case Opcode::Shl: return "shl";
    case Opcode::Mul: return "mul";
    case Opcode::AddI: return "addi";
    case Opcode::SubI: return "subi";
    case Opcode::AndI: return "andi";
    case Opcode::OrI: return "ori";
    case Opcode::ShlI: return "shli";
    case Opcode::MulI: return "muli";
    case Opcode::Load: return "lw";
    case Opcode::Store: return "sw";
    case Opcode::LoadX: return "lwx";
    case Opcode::StoreX: return "swx";
    case Opcode::MtSpr: return "mtspr";
    case Opcode::MfSpr: return "mfspr";
    case Opcode::Beq: return "beq";
    case Opcode::Bne: return "bne";
    case Opcode::Blt: return "blt";
    case Opcode::Jal: return "jal";
    case Opcode::Jalr: return "jalr";
    case Opcode::Halt: return "halt";
  }
  return "?";
}

Word encode(const Instruction& i) {
  const Word op = primary(i.op) << 26;
  check_reg(i.rd);
  check_reg(i.ra);
  check_reg(i.rb);
  switch (i.op) {
    case Opcode::Add: case Opcode::Sub: case Opcode::And:
    case Opcode::Or: case Opcode::Shl: case Opcode::Mul:
    case Opcode::LoadX: case Opcode::StoreX:
      return op | field_rd(i.rd) | field_ra(i.ra) | field_rb(i.rb);
    case Opcode::AddI: case Opcode::SubI: case Opcode::AndI:
    case Opcode::OrI: case Opcode::ShlI: case Opcode::MulI:
    case Opcode::Load:
      check_imm16(i.imm);
      return op | field_rd(i.rd) | field_ra(i.ra) | field_imm(i.imm);
    case Opcode::Store:
      check_imm16(i.imm);
      return op | field_rd(i.rb) | field_ra(i.ra) | field_imm(i.imm);
    case Opcode::MtSpr:
      if (i.spr != kSprGeb && i.spr != kSprPhwe) {
        throw RangeError("mtspr: only SPR bits 17 and 18 exist");
      }
      if (i.imm != 0 && i.imm != 1) throw RangeError("mtspr: value must be 0 or 1");
      return op | field_ra(i.spr) | static_cast<Word>(i.imm);
    case Opcode::MfSpr:
      if (i.spr != kSprGeb && i.spr != kSprPhwe) {
        throw RangeError("mfspr: only SPR bits 17 and 18 exist");
      }
      return op | field_rd(i.rd) | field_ra(i.spr);
    case Opcode::Beq: case Opcode::Bne: case Opcode::Blt:
      check_imm16(i.imm);
      return op | field_rd(i.ra) | field_ra(i.rb) | field_imm(i.imm);
    case Opcode::Jal:
      if (i.imm < 0 || static_cast<Word>(i.imm) > kJalTargetMask) {
        throw RangeError("jal target out of 26-bit range");
      }
      return op | static_cast<Word>(i.imm);
    case Opcode::Jalr:
      return op | field_ra(i.ra);
    case Opcode::Halt:
      return op;
  }
  throw RangeError("unknown opcode");
}

Instruction decode(Word w) {
  const Word code = w >> 26;
  const unsigned f_rd = (w >> 21) & 31;
  const unsigned f_ra = (w >> 16) & 31;
  const unsigned f_rb = (w >> 11) & 31;
  auto require_zero = [&](Word mask) {
    if (w & mask) throw DecodeError("reserved bits set in word " + hex(w));
  };

  auto alu_op = [](Word c) { return static_cast<Opcode>(static_cast<int>(Opcode::Add) + (c - kOpAdd)); };
  auto alui_op = [](Word c) { return static_cast<Opcode>(static_cast<int>(Opcode::AddI) + (c - kOpAddI)); };
  auto br_op = [](Word c) { return static_cast<Opcode>(static_cast<int>(Opcode::Beq) + (c - kOpBeq)); };

  switch (code) {
    case kOpAdd: case kOpSub: case kOpAnd: case kOpOr: case kOpShl: case kOpMul:
      require_zero(0x7FF);
      return Instruction::alu(alu_op(code), f_rd, f_ra, f_rb);
    case kOpAddI: case kOpSubI: case kOpAndI: case kOpOrI: case kOpShlI: case kOpMulI:
      return Instruction::alui(alui_op(code), f_rd, f_ra, sext16(w));
    case kOpLoad:
      return Instruction::load(f_rd, f_ra, sext16(w));
    case kOpStore:
      return Instruction::store(f_ra, sext16(w), f_rd);
    case kOpLoadX:
      require_zero(0x7FF);
      return Instruction::loadx(f_rd, f_ra, f_rb);
    case kOpStoreX:
      require_zero(0x7FF);
      return Instruction::storex(f_ra, f_rb, f_rd);
    case kOpMtSpr:
      require_zero((31u << 21) | 0xFFFE);
      if (f_ra != kSprGeb && f_ra != kSprPhwe) {
        throw DecodeError("mtspr to unmodeled SPR bit " + std::to_string(f_ra));
      }
      return Instruction::mtspr(f_ra, (w & 1) != 0);
    case kOpMfSpr:
      require_zero(0xFFFF);
      if (f_ra != kSprGeb && f_ra != kSprPhwe) {
        throw DecodeError("mfspr from unmodeled SPR bit " + std::to_string(f_ra));
      }
      return Instruction::mfspr(f_rd, f_ra);
    case kOpBeq: case kOpBne: case kOpBlt:
      return Instruction::branch(br_op(code), f_rd, f_ra, sext16(w));
    case kOpJal:
      return Instruction::jal(w & kJalTargetMask);
    case kOpJalr:
      require_zero((31u << 21) | 0xFFFF);
      return Instruction::jalr(f_ra);
    case kOpHalt:
      require_zero((1u << 26) - 1);
      return Instruction::halt();
    default:
      throw DecodeError("unassigned opcode in word " + hex(w));
  }
}

std::string disassemble(const Instruction& i) {
  auto r = [](unsigned n) { return "r" + std::to_string(n); };
  const std::string m = mnemonic(i.op);
  switch (i.op) {
    case Opcode::Add: case Opcode::Sub: case Opcode::And:
    case Opcode::Or: case Opcode::Shl: case Opcode::Mul:
      return m + " " + r(i.rd) + ", " + r(i.ra) + ", " + r(i.rb);
    case Opcode::AddI: case Opcode::SubI: case Opcode::AndI:
    case Opcode::OrI: case Opcode::ShlI: case Opcode::MulI:
      return m + " " + r(i.rd) + ", " + r(i.ra) + ", " + std::to_string(i.imm);
    case Opcode::Load:
      return m + " " + r(i.rd) + ", " + std::to_string(i.imm) + "(" + r(i.ra) + ")";
    case Opcode::Store:
      return m + " " + std::to_string(i.imm) + "(" + r(i.ra) + "), " + r(i.rb);
    case Opcode::LoadX:
      return m + " " + r(i.rd) + ", " + r(i.ra) + ", " + r(i.rb);
    case Opcode::StoreX:
      return m + " " + r(i.ra) + ", " + r(i.rb) + ", " + r(i.rd);
    case Opcode::MtSpr:
      return m + " " + std::to_string(i.spr) + ", " + std::to_string(i.imm);
    case Opcode::MfSpr:
      return m + " " + r(i.rd) + ", " + std::to_string(i.spr);
    case Opcode::Beq: case Opcode::Bne: case Opcode::Blt:
      return m + " " + r(i.ra) + ", " + r(i.rb) + ", " + std::to_string(i.imm);
    case Opcode::Jal:
      return m + " " + hex(static_cast<Word>(i.imm) * 4);
    case Opcode::Jalr:
      return m + " " + r(i.ra);
    case Opcode::Halt:
      return m;
  }
  return "?";
}

const char* to_string(TrapKind kind) {
  switch (kind) {
    case TrapKind::Mismatch: return "mismatch";
    case TrapKind::DecodeError: return "decode-error";
    case TrapKind::AlignmentError: return "alignment-error";
  }
  return "?";
}

std::vector<std::uint8_t> serialize_image(const Image& image) {
  std::vector<std::uint8_t> out;
  out.reserve(4 * (3 + image.code.size()));
  auto put = [&out](Word w) {
    out.push_back(static_cast<std::uint8_t>(w >> 24));
    out.push_back(static_cast<std::uint8_t>(w >> 16));
    out.push_back(static_cast<std::uint8_t>(w >> 8));
    out.push_back(static_cast<std::uint8_t>(w));
  };
  put(image.entry);
  put(image.initial_sp);
  put(static_cast<Word>(image.code.size()));
  for (Word w : image.code) put(w);
  return out;
}

Image parse_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 4 != 0) throw ImageFormatError("image size is not a multiple of 4 bytes");
  if (bytes.size() < 12) throw ImageFormatError("image shorter than its 3-word header");
  auto get = [&bytes](std::size_t word_index) {
    const auto* p = bytes.data() + 4 * word_index;
    return (Word{p[0]} << 24) | (Word{p[1]} << 16) | (Word{p[2]} << 8) | Word{p[3]};
  };
  Image image;
  image.entry = get(0);
  image.initial_sp = get(1);
  const Word length = get(2);
  if (length != bytes.size() / 4 - 3) {
    throw ImageFormatError("header length " + std::to_string(length) + " does not match " +
                           std::to_string(bytes.size() / 4 - 3) + " code words");
  }
  if (image.entry % 4 != 0) throw ImageFormatError("entry pc is not word aligned");
  if (image.initial_sp % 4 != 0) throw ImageFormatError("initial sp is not word aligned");
  image.code.reserve(length);
  for (Word i = 0; i < length; ++i) image.code.push_back(get(3 + i));
  return image;
}

Image read_image_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageFormatError("cannot open image " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_image(bytes);
}

void write_image_file(const Image& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageFormatError("cannot write image " + path);
  const auto bytes = serialize_image(image);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

MachineState load_image(const Image& image) {
  MachineState state;
  for (std::size_t i = 0; i < image.code.size(); ++i) {
    state.mem.write_word(kCodeBase + static_cast<Word>(4 * i), image.code[i]);
  }
  state.pc = image.entry;
  state.regs[kRegSp] = image.initial_sp;
  return state;
}

}  // namespace gandalf
