#include "gandalf/minig/compiler.hpp"

#include <functional>
#include <set>
#include <unordered_map>

#include "gandalf/guard.hpp"
#include "gandalf/minig/parser.hpp"

namespace gandalf::minig {

using assembly::AsmInsn;
using assembly::AsmProgram;
using assembly::Role;

const char* to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::System: return "system";
    case BlockKind::Scalars: return "scalars";
    case BlockKind::Array: return "array";
    case BlockKind::Pointer: return "pointer";
  }
  return "?";
}

std::uint32_t FrameLayout::header_bytes() const {
  std::uint32_t n = 0;
  for (const auto& b : blocks) n += b.header_offset >= 0 ? guard::kHeaderBytes : 0;
  return n;
}

std::uint32_t FrameLayout::data_bytes() const {
  std::uint32_t n = 0;
  for (const auto& b : blocks) n += b.size;
  return n;
}

const FrameBlock* FrameLayout::find_block(const std::string& name) const {
  auto it = block_index.find(name);
  return it == block_index.end() ? nullptr : &blocks[it->second];
}

double CompileOutput::size_bloat() const {
  if (plain_count == 0) return 0.0;
  return static_cast<double>(instrumented_count) / static_cast<double>(plain_count) - 1.0;
}

const FunctionInfo* CompileOutput::find_function(const std::string& name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

namespace {

constexpr unsigned kScratchA = 12;  // header / block addressing
constexpr unsigned kScratchB = 10;
constexpr unsigned kFirstArg = 3;
constexpr unsigned kMaxArgRegs = 6;
constexpr unsigned kFirstTemp = 13;
constexpr unsigned kLastTemp = 31;
constexpr std::int32_t kMaxDisplacement = 32767;

void walk_expr(const Expr& e, const std::function<void(const Expr&)>& post) {
  if (e.lhs) walk_expr(*e.lhs, post);
  if (e.rhs) walk_expr(*e.rhs, post);
  for (const auto& a : e.args) walk_expr(*a, post);
  post(e);
}

void walk_stmt(const Stmt& s, const std::function<void(const Stmt&)>& pre) {
  pre(s);
  for (const auto& c : s.stmts) walk_stmt(*c, pre);
  if (s.body) walk_stmt(*s.body, pre);
  if (s.else_body) walk_stmt(*s.else_body, pre);
}

// Call expressions of a function in the order codegen hoists them.
std::vector<const Expr*> collect_calls(const Function& fn) {
  std::vector<const Expr*> calls;
  walk_stmt(*fn.body, [&](const Stmt& s) {
    auto visit = [&](const ExprPtr& e) {
      if (e) walk_expr(*e, [&](const Expr& x) {
        if (x.kind == Expr::Kind::Call) calls.push_back(&x);
      });
    };
    visit(s.target);
    visit(s.value);
  });
  return calls;
}

}  // namespace

FrameLayout layout_frame(const Function& fn, bool gandalf) {
  FrameLayout layout;
  layout.function = fn.name;
  layout.gandalf = gandalf;

  std::vector<std::string> scalars;
  std::vector<std::string> pointers;
  std::vector<std::pair<std::string, std::int32_t>> arrays;
  std::set<std::string> names;
  auto declare = [&](const std::string& name, SourcePos pos) {
    if (!names.insert(name).second) throw CompileError(pos, "redeclaration of '" + name + "'");
  };

  for (const auto& p : fn.params) {
    declare(p.name, p.pos);
    (p.is_pointer ? pointers : scalars).push_back(p.name);
  }
  walk_stmt(*fn.body, [&](const Stmt& s) {
    if (s.kind != Stmt::Kind::Decl) return;
    declare(s.name, s.pos);
    switch (s.decl_kind) {
      case VarKind::Int: scalars.push_back(s.name); break;
      case VarKind::Pointer: pointers.push_back(s.name); break;
      case VarKind::Array: arrays.emplace_back(s.name, s.array_length); break;
    }
  });
  const std::size_t ncalls = collect_calls(fn).size();
  for (std::size_t i = 0; i < ncalls; ++i) scalars.push_back("$call" + std::to_string(i));

  const std::uint32_t hdr = gandalf ? guard::kHeaderBytes : 0;
  std::uint32_t off = 0;
  auto add_block = [&](std::string name, BlockKind kind, std::uint32_t size) {
    FrameBlock b;
    b.name = std::move(name);
    b.kind = kind;
    b.header_offset = gandalf ? static_cast<std::int32_t>(off) : -1;
    b.data_offset = static_cast<std::int32_t>(off + hdr);
    b.size = size;
    off += hdr + size;
    if (kind == BlockKind::Pointer || kind == BlockKind::Array) {
      layout.block_index[b.name] = layout.blocks.size();
    }
    layout.blocks.push_back(std::move(b));
  };

  for (const auto& p : pointers) add_block(p, BlockKind::Pointer, gandalf ? 8 : 4);
  for (const auto& [name, len] : arrays) add_block(name, BlockKind::Array, 4u * static_cast<std::uint32_t>(len));
  if (!scalars.empty()) {
    add_block("$frame", BlockKind::Scalars, 4u * static_cast<std::uint32_t>(scalars.size()));
    layout.fp_offset = layout.blocks.back().data_offset;
    for (std::size_t i = 0; i < scalars.size(); ++i) {
      layout.scalar_slots[scalars[i]] = static_cast<std::int32_t>(4 * i);
    }
  } else {
    layout.fp_offset = static_cast<std::int32_t>(off + hdr);
  }
  add_block("$system", BlockKind::System, 8);
  layout.frame_size = off;

  if (layout.frame_size > static_cast<std::uint32_t>(kMaxDisplacement) - 16) {
    throw CompileError(fn.pos, "frame of '" + fn.name + "' (" + std::to_string(layout.frame_size) +
                                   " bytes) exceeds the 16-bit displacement range");
  }
  return layout;
}

std::vector<AsmInsn> emit_prologue(const FrameLayout& layout) {
  std::vector<AsmInsn> out;
  auto emit = [&](const Instruction& i, Role role) { out.push_back(AsmInsn{i, {}, role, 0}); };
  emit(Instruction::mtspr(kSprPhwe, true), Role::Boilerplate);
  for (const auto& b : layout.blocks) {
    if (b.header_offset < 0) continue;
    const Role role = b.kind == BlockKind::System ? Role::Boilerplate : Role::Header;
    const std::int32_t to_data = b.data_offset - b.header_offset;  // 12
    emit(Instruction::alui(Opcode::AddI, kScratchA, kRegSp, b.header_offset), role);
    emit(Instruction::store(kScratchA, 0, kScratchA), role);
    emit(Instruction::alui(Opcode::AddI, kScratchB, kScratchA, to_data - 1), role);
    emit(Instruction::store(kScratchA, 4, kScratchB), role);
    emit(Instruction::alui(Opcode::AddI, kScratchB, kScratchA, to_data + static_cast<std::int32_t>(b.size)), role);
    emit(Instruction::store(kScratchA, 8, kScratchB), role);
  }
  emit(Instruction::mtspr(kSprPhwe, false), Role::Boilerplate);
  return out;
}

namespace {

enum class Type { Int, Ptr };

struct PtrVal {
  unsigned base;  // object base (instrumented) or address (plain)
  unsigned off;   // byte offset; unused in plain builds
};

struct Element {
  unsigned base;
  unsigned index;
};

struct Signature {
  std::vector<bool> pointer_params;
};

class FunctionGen {
 public:
  FunctionGen(const Function& fn, const std::map<std::string, Signature>& sigs, bool gandalf, AsmProgram& out)
      : fn_(fn), sigs_(sigs), g_(gandalf), out_(out), layout_(layout_frame(fn, gandalf)) {
    const auto calls = collect_calls(fn);
    for (std::size_t i = 0; i < calls.size(); ++i) {
      call_slot_[calls[i]] = layout_.scalar_slots.at("$call" + std::to_string(i));
    }
  }

  const FrameLayout& layout() const { return layout_; }

  void generate() {
    const auto frame = static_cast<std::int32_t>(layout_.frame_size);
    const FrameBlock& sys = layout_.system_block();

    out_.label(fn_.name);
    emit(Instruction::alui(Opcode::AddI, kRegSp, kRegSp, -frame));
    if (g_) {
      for (auto& i : emit_prologue(layout_)) out_.items.emplace_back(std::move(i));
      emit(Instruction::alui(Opcode::AddI, kScratchA, kRegSp, sys.data_offset), Role::Boilerplate);
      emit(Instruction::store(kScratchA, 0, kRegLink));
      emit(Instruction::store(kScratchA, 4, kRegFp));
    } else {
      emit(Instruction::store(kRegSp, sys.data_offset, kRegLink));
      emit(Instruction::store(kRegSp, sys.data_offset + 4, kRegFp));
    }
    emit(Instruction::alui(Opcode::AddI, kRegFp, kRegSp, layout_.fp_offset));

    unsigned argreg = kFirstArg;
    for (const auto& p : fn_.params) {
      declared_[p.name] = p.is_pointer ? VarKind::Pointer : VarKind::Int;
      if (!p.is_pointer) {
        emit(Instruction::store(kRegFp, layout_.scalar_slots.at(p.name), argreg++));
        continue;
      }
      const FrameBlock* b = layout_.find_block(p.name);
      if (g_) {
        emit(Instruction::alui(Opcode::AddI, kScratchA, kRegSp, b->data_offset), Role::Pointer);
        emit(Instruction::store(kScratchA, 0, argreg++));
        emit(Instruction::store(kScratchA, 4, argreg++), Role::Pointer);
      } else {
        emit(Instruction::store(kRegSp, b->data_offset, argreg++));
      }
    }

    statement(*fn_.body);

    emit(Instruction::alui(Opcode::AddI, kRegRet, kRegZero, 0));
    out_.label(ret_label());
    if (g_) {
      emit(Instruction::alui(Opcode::AddI, kScratchA, kRegSp, sys.data_offset), Role::Boilerplate);
      emit(Instruction::load(kRegLink, kScratchA, 0));
      emit(Instruction::load(kRegFp, kScratchA, 4));
    } else {
      emit(Instruction::load(kRegLink, kRegSp, sys.data_offset));
      emit(Instruction::load(kRegFp, kRegSp, sys.data_offset + 4));
    }
    emit(Instruction::alui(Opcode::AddI, kRegSp, kRegSp, frame));
    emit(Instruction::jalr(kRegLink));
  }

 private:
  void emit(const Instruction& i, Role role = Role::Code, std::string target = {}) {
    out_.emit(i, role, std::move(target));
  }
  void jump(const std::string& label) { emit(Instruction::branch(Opcode::Beq, kRegZero, kRegZero, 0), Role::Code, label); }

  std::string ret_label() const { return fn_.name + ".ret"; }
  std::string new_label() { return fn_.name + ".L" + std::to_string(label_counter_++); }

  unsigned alloc(SourcePos pos) {
    if (next_temp_ > kLastTemp) throw CompileError(pos, "expression too complex for the temporary registers");
    return next_temp_++;
  }
  void release(unsigned reg) { next_temp_ = reg; }

  [[noreturn]] static void fail(SourcePos pos, const std::string& msg) { throw CompileError(pos, msg); }

  VarKind var_kind(const std::string& name, SourcePos pos) const {
    auto it = declared_.find(name);
    if (it == declared_.end()) fail(pos, "use of undeclared variable '" + name + "'");
    return it->second;
  }

  Type type_of(const Expr& e) const {
    switch (e.kind) {
      case Expr::Kind::IntLit: case Expr::Kind::Index: case Expr::Kind::Deref:
      case Expr::Kind::Call: case Expr::Kind::Unary:
        return Type::Int;
      case Expr::Kind::Var:
        return var_kind(e.name, e.pos) == VarKind::Int ? Type::Int : Type::Ptr;
      case Expr::Kind::AddrOf:
        return Type::Ptr;
      case Expr::Kind::Binary:
        if ((e.binary_op == BinaryOp::Add || e.binary_op == BinaryOp::Sub) && type_of(*e.lhs) == Type::Ptr) {
          return Type::Ptr;
        }
        return Type::Int;
    }
    return Type::Int;
  }

  void require(const Expr& e, Type t) const {
    if (type_of(e) != t) fail(e.pos, t == Type::Int ? "expected an integer expression" : "expected a pointer expression");
  }

  void load_const(unsigned reg, std::int32_t value) {
    if (value >= -32768 && value <= 32767) {
      emit(Instruction::alui(Opcode::AddI, reg, kRegZero, value));
      return;
    }
    const auto v = static_cast<std::uint32_t>(value);
    const auto lo = static_cast<std::int16_t>(v & 0xFFFF);
    const auto hi = static_cast<std::int16_t>((v - static_cast<std::uint32_t>(static_cast<std::int32_t>(lo))) >> 16);
    emit(Instruction::alui(Opcode::AddI, reg, kRegZero, hi));
    emit(Instruction::alui(Opcode::ShlI, reg, reg, 16));
    if (lo != 0) emit(Instruction::alui(Opcode::AddI, reg, reg, lo));
  }

  // ---- calls ------------------------------------------------------------

  void hoist_calls(const Expr* e) {
    if (!e) return;
    walk_expr(*e, [&](const Expr& x) {
      if (x.kind == Expr::Kind::Call) emit_call(x);
    });
  }

  void emit_call(const Expr& call) {
    auto it = sigs_.find(call.name);
    if (it == sigs_.end()) fail(call.pos, "call to undefined function '" + call.name + "'");
    const auto& params = it->second.pointer_params;
    if (params.size() != call.args.size()) {
      fail(call.pos, "'" + call.name + "' expects " + std::to_string(params.size()) + " arguments");
    }
    std::size_t regs_needed = 0;
    for (bool is_ptr : params) regs_needed += is_ptr && g_ ? 2 : 1;
    if (regs_needed > kMaxArgRegs) fail(call.pos, "too many argument words for '" + call.name + "'");

    const unsigned mark = next_temp_;
    std::vector<unsigned> words;
    for (std::size_t i = 0; i < call.args.size(); ++i) {
      const Expr& a = *call.args[i];
      if (params[i]) {
        require(a, Type::Ptr);
        const PtrVal p = gen_ptr(a);
        words.push_back(p.base);
        if (g_) words.push_back(p.off);
      } else {
        require(a, Type::Int);
        words.push_back(gen_int(a));
      }
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
      emit(Instruction::alu(Opcode::Add, kFirstArg + static_cast<unsigned>(i), words[i], kRegZero));
    }
    release(mark);
    emit(Instruction::jal(0), Role::Code, call.name);
    emit(Instruction::store(kRegFp, call_slot_.at(&call), kRegRet));
  }

  // ---- expressions --------------------------------------------------------

  Element element(const Expr& e) {
    const VarKind k = var_kind(e.name, e.pos);
    require(*e.lhs, Type::Int);
    if (k == VarKind::Int) fail(e.pos, "'" + e.name + "' is not an array or pointer");
    if (k == VarKind::Array) {
      const unsigned base = alloc(e.pos);
      emit(Instruction::alui(Opcode::AddI, base, kRegSp, layout_.find_block(e.name)->data_offset));
      const unsigned idx = gen_int(*e.lhs);
      emit(Instruction::alui(Opcode::ShlI, idx, idx, 2));
      return {base, idx};
    }
    const PtrVal p = load_pointer_var(e.name, e.pos);
    const unsigned idx = gen_int(*e.lhs);
    emit(Instruction::alui(Opcode::ShlI, idx, idx, 2));
    if (g_) {
      emit(Instruction::alu(Opcode::Add, p.off, p.off, idx), Role::Pointer);
      release(idx);
      return {p.base, p.off};
    }
    return {p.base, idx};
  }

  PtrVal load_pointer_var(const std::string& name, SourcePos pos) {
    const FrameBlock* b = layout_.find_block(name);
    if (g_) {
      const unsigned base = alloc(pos);
      const unsigned off = alloc(pos);
      emit(Instruction::alui(Opcode::AddI, off, kRegSp, b->data_offset), Role::Pointer);
      emit(Instruction::load(base, off, 0));
      emit(Instruction::load(off, off, 4), Role::Pointer);
      return {base, off};
    }
    const unsigned addr = alloc(pos);
    emit(Instruction::load(addr, kRegSp, b->data_offset));
    return {addr, 0};
  }

  void compare(BinaryOp op, unsigned l, unsigned r) {
    // l <- (l op r) ? 1 : 0
    Opcode br = Opcode::Blt;
    unsigned a = l;
    unsigned b = r;
    bool invert = false;
    switch (op) {
      case BinaryOp::Lt: break;
      case BinaryOp::Gt: a = r; b = l; break;
      case BinaryOp::Le: a = r; b = l; invert = true; break;
      case BinaryOp::Ge: invert = true; break;
      case BinaryOp::Eq: br = Opcode::Beq; break;
      case BinaryOp::Ne: br = Opcode::Bne; break;
      default: break;
    }
    emit(Instruction::branch(br, a, b, 3));
    emit(Instruction::alui(Opcode::AddI, l, kRegZero, invert ? 1 : 0));
    emit(Instruction::branch(Opcode::Beq, kRegZero, kRegZero, 2));
    emit(Instruction::alui(Opcode::AddI, l, kRegZero, invert ? 0 : 1));
  }

  unsigned gen_int(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit: {
        const unsigned r = alloc(e.pos);
        load_const(r, e.value);
        return r;
      }
      case Expr::Kind::Var: {
        if (var_kind(e.name, e.pos) != VarKind::Int) fail(e.pos, "'" + e.name + "' is not an integer");
        const unsigned r = alloc(e.pos);
        emit(Instruction::load(r, kRegFp, layout_.scalar_slots.at(e.name)));
        return r;
      }
      case Expr::Kind::Index: {
        const Element el = element(e);
        emit(Instruction::loadx(el.base, el.base, el.index));
        release(el.base + 1);
        return el.base;
      }
      case Expr::Kind::Deref: {
        require(*e.lhs, Type::Ptr);
        const PtrVal p = gen_ptr(*e.lhs);
        if (g_) {
          emit(Instruction::loadx(p.base, p.base, p.off));
        } else {
          emit(Instruction::load(p.base, p.base, 0));
        }
        release(p.base + 1);
        return p.base;
      }
      case Expr::Kind::Call: {
        const unsigned r = alloc(e.pos);
        emit(Instruction::load(r, kRegFp, call_slot_.at(&e)));
        return r;
      }
      case Expr::Kind::Unary: {
        require(*e.lhs, Type::Int);
        const unsigned r = gen_int(*e.lhs);
        if (e.unary_op == UnaryOp::Neg) {
          emit(Instruction::alu(Opcode::Sub, r, kRegZero, r));
        } else {
          compare(BinaryOp::Eq, r, kRegZero);
        }
        return r;
      }
      case Expr::Kind::Binary: {
        if (type_of(e) != Type::Int) fail(e.pos, "pointer arithmetic used as an integer");
        require(*e.lhs, Type::Int);
        require(*e.rhs, Type::Int);
        const unsigned l = gen_int(*e.lhs);
        const unsigned r = gen_int(*e.rhs);
        switch (e.binary_op) {
          case BinaryOp::Add: emit(Instruction::alu(Opcode::Add, l, l, r)); break;
          case BinaryOp::Sub: emit(Instruction::alu(Opcode::Sub, l, l, r)); break;
          case BinaryOp::Mul: emit(Instruction::alu(Opcode::Mul, l, l, r)); break;
          case BinaryOp::And: emit(Instruction::alu(Opcode::And, l, l, r)); break;
          case BinaryOp::Or: emit(Instruction::alu(Opcode::Or, l, l, r)); break;
          case BinaryOp::Shl: emit(Instruction::alu(Opcode::Shl, l, l, r)); break;
          default: compare(e.binary_op, l, r); break;
        }
        release(r);
        return l;
      }
      case Expr::Kind::AddrOf:
        break;
    }
    fail(e.pos, "expected an integer expression");
  }

  PtrVal gen_ptr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Var: {
        const VarKind k = var_kind(e.name, e.pos);
        if (k == VarKind::Pointer) return load_pointer_var(e.name, e.pos);
        if (k == VarKind::Array) return array_start(e.name, e.pos);
        break;
      }
      case Expr::Kind::AddrOf: {
        const Expr& inner = *e.lhs;
        const VarKind k = var_kind(inner.name, inner.pos);
        if (inner.kind == Expr::Kind::Var) {
          if (k == VarKind::Array) return array_start(inner.name, inner.pos);
          if (k == VarKind::Pointer) fail(e.pos, "pointers to pointers are not supported");
          const std::int32_t slot = layout_.scalar_slots.at(inner.name);
          const unsigned base = alloc(e.pos);
          if (g_) {
            const unsigned off = alloc(e.pos);
            emit(Instruction::alu(Opcode::Add, base, kRegFp, kRegZero));
            emit(Instruction::alui(Opcode::AddI, off, kRegZero, slot), Role::Pointer);
            return {base, off};
          }
          emit(Instruction::alui(Opcode::AddI, base, kRegFp, slot));
          return {base, 0};
        }
        // &name[index]
        if (k == VarKind::Int) fail(inner.pos, "'" + inner.name + "' is not an array or pointer");
        const Element el = element(inner);
        if (g_) return {el.base, el.index};
        emit(Instruction::alu(Opcode::Add, el.base, el.base, el.index));
        release(el.index);
        return {el.base, 0};
      }
      case Expr::Kind::Binary: {
        if (e.binary_op != BinaryOp::Add && e.binary_op != BinaryOp::Sub) break;
        require(*e.lhs, Type::Ptr);
        require(*e.rhs, Type::Int);
        const PtrVal p = gen_ptr(*e.lhs);
        const unsigned d = gen_int(*e.rhs);
        emit(Instruction::alui(Opcode::ShlI, d, d, 2));
        const Opcode op = e.binary_op == BinaryOp::Add ? Opcode::Add : Opcode::Sub;
        if (g_) {
          emit(Instruction::alu(op, p.off, p.off, d));
        } else {
          emit(Instruction::alu(op, p.base, p.base, d));
        }
        release(d);
        return p;
      }
      default:
        break;
    }
    fail(e.pos, "expected a pointer expression");
  }

  PtrVal array_start(const std::string& name, SourcePos pos) {
    const unsigned base = alloc(pos);
    emit(Instruction::alui(Opcode::AddI, base, kRegSp, layout_.find_block(name)->data_offset));
    if (g_) {
      const unsigned off = alloc(pos);
      emit(Instruction::alui(Opcode::AddI, off, kRegZero, 0), Role::Pointer);
      return {base, off};
    }
    return {base, 0};
  }

  // ---- statements ---------------------------------------------------------

  void store_pointer_var(const std::string& name, const PtrVal& p, SourcePos pos) {
    const FrameBlock* b = layout_.find_block(name);
    if (g_) {
      const unsigned addr = alloc(pos);
      emit(Instruction::alui(Opcode::AddI, addr, kRegSp, b->data_offset), Role::Pointer);
      emit(Instruction::store(addr, 0, p.base));
      emit(Instruction::store(addr, 4, p.off), Role::Pointer);
      release(addr);
    } else {
      emit(Instruction::store(kRegSp, b->data_offset, p.base));
    }
  }

  void assign(const Expr& target, const Expr& value, SourcePos pos) {
    switch (target.kind) {
      case Expr::Kind::Var: {
        const VarKind k = var_kind(target.name, target.pos);
        if (k == VarKind::Array) fail(pos, "cannot assign to array '" + target.name + "'");
        if (k == VarKind::Int) {
          require(value, Type::Int);
          const unsigned v = gen_int(value);
          emit(Instruction::store(kRegFp, layout_.scalar_slots.at(target.name), v));
          release(v);
        } else {
          require(value, Type::Ptr);
          const PtrVal p = gen_ptr(value);
          store_pointer_var(target.name, p, pos);
          release(p.base);
        }
        return;
      }
      case Expr::Kind::Index: {
        require(value, Type::Int);
        const Element el = element(target);
        const unsigned v = gen_int(value);
        emit(Instruction::storex(el.base, el.index, v));
        release(el.base);
        return;
      }
      case Expr::Kind::Deref: {
        require(*target.lhs, Type::Ptr);
        require(value, Type::Int);
        const PtrVal p = gen_ptr(*target.lhs);
        const unsigned v = gen_int(value);
        if (g_) {
          emit(Instruction::storex(p.base, p.off, v));
        } else {
          emit(Instruction::store(p.base, 0, v));
        }
        release(p.base);
        return;
      }
      default:
        fail(pos, "left side of assignment is not assignable");
    }
  }

  void condition(const Expr& cond, const std::string& false_label) {
    hoist_calls(&cond);
    require(cond, Type::Int);
    const unsigned c = gen_int(cond);
    emit(Instruction::branch(Opcode::Beq, c, kRegZero, 0), Role::Code, false_label);
    release(c);
  }

  void statement(const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Block:
        for (const auto& c : s.stmts) statement(*c);
        return;
      case Stmt::Kind::Decl: {
        if (s.value) {
          // initializer may not refer to the variable being declared
          hoist_calls(s.value.get());
        }
        declared_[s.name] = s.decl_kind;
        if (s.value) {
          Expr target;
          target.kind = Expr::Kind::Var;
          target.name = s.name;
          target.pos = s.pos;
          assign(target, *s.value, s.pos);
        }
        return;
      }
      case Stmt::Kind::Assign:
        hoist_calls(s.target.get());
        hoist_calls(s.value.get());
        assign(*s.target, *s.value, s.pos);
        return;
      case Stmt::Kind::ExprStmt:
        hoist_calls(s.value.get());
        if (s.value->kind != Expr::Kind::Call) {
          if (type_of(*s.value) == Type::Int) {
            release(gen_int(*s.value));
          } else {
            release(gen_ptr(*s.value).base);
          }
        }
        return;
      case Stmt::Kind::If: {
        const std::string else_label = new_label();
        condition(*s.value, else_label);
        statement(*s.body);
        if (s.else_body) {
          const std::string end_label = new_label();
          jump(end_label);
          out_.label(else_label);
          statement(*s.else_body);
          out_.label(end_label);
        } else {
          out_.label(else_label);
        }
        return;
      }
      case Stmt::Kind::While: {
        const std::string top = new_label();
        const std::string end = new_label();
        out_.label(top);
        condition(*s.value, end);
        statement(*s.body);
        jump(top);
        out_.label(end);
        return;
      }
      case Stmt::Kind::Return: {
        hoist_calls(s.value.get());
        require(*s.value, Type::Int);
        const unsigned v = gen_int(*s.value);
        emit(Instruction::alu(Opcode::Add, kRegRet, v, kRegZero));
        release(v);
        jump(ret_label());
        return;
      }
    }
  }

  const Function& fn_;
  const std::map<std::string, Signature>& sigs_;
  bool g_;
  AsmProgram& out_;
  FrameLayout layout_;
  std::unordered_map<const Expr*, std::int32_t> call_slot_;
  std::map<std::string, VarKind> declared_;
  unsigned next_temp_ = kFirstTemp;
  int label_counter_ = 0;
};

struct Generated {
  AsmProgram program;
  std::vector<FunctionInfo> functions;
};

Generated generate(const Program& program, bool gandalf,
                   const std::map<std::string, Signature>& sigs) {
  Generated gen;
  AsmProgram& out = gen.program;
  out.label("_start");
  if (gandalf) out.emit(Instruction::mtspr(kSprGeb, true), Role::Boilerplate);
  out.emit(Instruction::jal(0), Role::Code, "main");
  out.emit(Instruction::halt());

  for (const auto& fn : program.functions) {
    const std::size_t before = out.instruction_count();
    FunctionGen fg(fn, sigs, gandalf, out);
    fg.generate();
    FunctionInfo info;
    info.name = fn.name;
    info.layout = fg.layout();
    (gandalf ? info.instrumented_count : info.plain_count) = out.instruction_count() - before;
    gen.functions.push_back(std::move(info));
  }
  return gen;
}

}  // namespace

CompileOutput compile(const Program& program, bool gandalf) {
  std::map<std::string, Signature> sigs;
  for (const auto& fn : program.functions) {
    if (fn.name == "_start") throw CompileError(fn.pos, "'_start' is reserved");
    Signature sig;
    for (const auto& p : fn.params) sig.pointer_params.push_back(p.is_pointer);
    if (!sigs.emplace(fn.name, std::move(sig)).second) {
      throw CompileError(fn.pos, "redefinition of function '" + fn.name + "'");
    }
  }
  const Function* main_fn = program.find("main");
  if (!main_fn) throw CompileError({1, 1}, "program has no 'main' function");
  if (!main_fn->params.empty()) throw CompileError(main_fn->pos, "'main' takes no parameters");

  Generated instrumented = generate(program, true, sigs);
  Generated plain = generate(program, false, sigs);

  CompileOutput out;
  out.gandalf = gandalf;
  out.instrumented_count = instrumented.program.instruction_count();
  out.plain_count = plain.program.instruction_count();
  out.boilerplate_count = instrumented.program.count(Role::Boilerplate);

  Generated& chosen = gandalf ? instrumented : plain;
  const Generated& other = gandalf ? plain : instrumented;
  out.functions = std::move(chosen.functions);
  for (std::size_t i = 0; i < out.functions.size(); ++i) {
    if (gandalf) out.functions[i].plain_count = other.functions[i].plain_count;
    else out.functions[i].instrumented_count = other.functions[i].instrumented_count;
  }
  out.program = std::move(chosen.program);
  return out;
}

CompileOutput compile_source(std::string_view source, bool gandalf) {
  return compile(parse(source), gandalf);
}

}  // namespace gandalf::minig
