#include "gandalf/asm.hpp"

#include <cctype>
#include <cstdio>
#include <sstream>

namespace gandalf::assembly {

const char* to_string(Role role) {
  switch (role) {
    case Role::Code: return "code";
    case Role::Boilerplate: return "boilerplate";
    case Role::Header: return "header";
    case Role::Pointer: return "pointer";
  }
  return "?";
}

std::size_t AsmProgram::instruction_count() const {
  std::size_t n = 0;
  for (const auto& item : items) n += std::holds_alternative<AsmInsn>(item);
  return n;
}

std::size_t AsmProgram::count(Role role) const {
  std::size_t n = 0;
  for (const auto& item : items) {
    if (const auto* i = std::get_if<AsmInsn>(&item); i && i->role == role) ++n;
  }
  return n;
}

std::map<std::string, Word> label_addresses(const AsmProgram& program) {
  std::map<std::string, Word> labels;
  Word addr = kCodeBase;
  for (const auto& item : program.items) {
    if (const auto* l = std::get_if<Label>(&item)) {
      if (!labels.emplace(l->name, addr).second) throw AsmError(0, "duplicate label '" + l->name + "'");
    } else {
      addr += 4;
    }
  }
  return labels;
}

Image assemble(const AsmProgram& program) {
  const auto labels = label_addresses(program);
  Image image;
  image.initial_sp = program.initial_sp;

  if (!program.entry_label.empty()) {
    auto it = labels.find(program.entry_label);
    if (it != labels.end()) {
      image.entry = it->second;
    } else if (program.entry_label != "_start") {
      throw AsmError(0, "entry label '" + program.entry_label + "' is not defined");
    }
  }

  Word pc = kCodeBase;
  for (const auto& item : program.items) {
    const auto* ai = std::get_if<AsmInsn>(&item);
    if (!ai) continue;
    Instruction insn = ai->insn;
    if (!ai->target.empty()) {
      auto it = labels.find(ai->target);
      if (it == labels.end()) throw AsmError(ai->line, "undefined label '" + ai->target + "'");
      if (is_branch(insn.op)) {
        insn.imm = static_cast<std::int32_t>(it->second - pc) / 4;
      } else if (insn.op == Opcode::Jal) {
        insn.imm = static_cast<std::int32_t>(it->second / 4);
      } else {
        throw AsmError(ai->line, "label operand on non-control instruction");
      }
    }
    try {
      image.code.push_back(encode(insn));
    } catch (const RangeError& e) {
      throw AsmError(ai->line, e.what());
    }
    pc += 4;
  }
  return image;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_operands(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_int(const std::string& s, std::int64_t& out) {
  if (s.empty()) return false;
  std::size_t i = 0;
  bool neg = false;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    i = 1;
  }
  int base = 10;
  if (s.size() > i + 1 && s[i] == '0' && (s[i + 1] == 'x' || s[i + 1] == 'X')) {
    base = 16;
    i += 2;
  }
  if (i >= s.size()) return false;
  std::int64_t v = 0;
  for (; i < s.size(); ++i) {
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (base == 16 && c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else return false;
    v = v * base + d;
    if (v > 0xFFFFFFFFll) return false;
  }
  out = neg ? -v : v;
  return true;
}

bool is_label_name(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_' || s[0] == '.')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  }
  return true;
}

struct LineParser {
  int line;

  [[noreturn]] void fail(const std::string& msg) const { throw AsmError(line, msg); }

  unsigned reg(const std::string& s) const {
    if (s.size() < 2 || (s[0] != 'r' && s[0] != 'R')) fail("expected register, got '" + s + "'");
    std::int64_t n;
    if (!parse_int(s.substr(1), n) || n < 0 || n >= kNumRegs) fail("bad register '" + s + "'");
    return static_cast<unsigned>(n);
  }

  std::int32_t imm(const std::string& s) const {
    std::int64_t v;
    if (!parse_int(s, v)) fail("bad immediate '" + s + "'");
    if (v > 0x7FFFFFFF) v -= 0x100000000ll;
    return static_cast<std::int32_t>(v);
  }

  // "imm(rN)"
  std::pair<std::int32_t, unsigned> mem(const std::string& s) const {
    const auto open = s.find('(');
    const auto close = s.find(')');
    if (open == std::string::npos || close != s.size() - 1) fail("expected imm(reg), got '" + s + "'");
    const std::string disp = trim(s.substr(0, open));
    return {disp.empty() ? 0 : imm(disp), reg(trim(s.substr(open + 1, close - open - 1)))};
  }

  void arity(const std::vector<std::string>& ops, std::size_t n, const std::string& m) const {
    if (ops.size() != n) fail("'" + m + "' expects " + std::to_string(n) + " operands");
  }
};

const std::map<std::string, Opcode>& mnemonic_table() {
  static const std::map<std::string, Opcode> table = [] {
    std::map<std::string, Opcode> t;
    for (int i = 0; i <= static_cast<int>(Opcode::Halt); ++i) {
      const auto op = static_cast<Opcode>(i);
      t.emplace(mnemonic(op), op);
    }
    return t;
  }();
  return table;
}

Role role_from_comment(const std::string& comment) {
  const std::string c = trim(comment);
  if (c.rfind("[header]", 0) == 0) return Role::Header;
  if (c.rfind("[boilerplate]", 0) == 0) return Role::Boilerplate;
  if (c.rfind("[pointer]", 0) == 0) return Role::Pointer;
  return Role::Code;
}

}  // namespace

AsmProgram parse_asm(std::string_view text) {
  AsmProgram prog;
  prog.entry_label = "_start";
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    LineParser lp{lineno};
    std::string comment;
    if (auto semi = raw.find(';'); semi != std::string::npos) {
      comment = raw.substr(semi + 1);
      raw.erase(semi);
    }
    std::string line = trim(raw);

    // leading labels
    for (;;) {
      const auto colon = line.find(':');
      if (colon == std::string::npos) break;
      const std::string name = trim(line.substr(0, colon));
      if (!is_label_name(name)) lp.fail("bad label '" + name + "'");
      prog.label(name);
      line = trim(line.substr(colon + 1));
    }
    if (line.empty()) continue;

    std::string m;
    std::string rest;
    if (auto sp = line.find_first_of(" \t"); sp != std::string::npos) {
      m = line.substr(0, sp);
      rest = line.substr(sp + 1);
    } else {
      m = line;
    }

    if (m == ".entry") {
      const std::string name = trim(rest);
      if (!is_label_name(name)) lp.fail(".entry expects a label");
      prog.entry_label = name;
      continue;
    }
    if (m == ".sp") {
      prog.initial_sp = static_cast<Word>(lp.imm(trim(rest)));
      continue;
    }

    auto it = mnemonic_table().find(m);
    if (it == mnemonic_table().end()) lp.fail("unknown mnemonic '" + m + "'");
    const Opcode op = it->second;
    const auto ops = split_operands(rest);
    AsmInsn ai;
    ai.line = lineno;
    ai.role = role_from_comment(comment);

    if (is_alu(op)) {
      lp.arity(ops, 3, m);
      ai.insn = Instruction::alu(op, lp.reg(ops[0]), lp.reg(ops[1]), lp.reg(ops[2]));
    } else if (is_alui(op)) {
      lp.arity(ops, 3, m);
      ai.insn = Instruction::alui(op, lp.reg(ops[0]), lp.reg(ops[1]), lp.imm(ops[2]));
    } else if (op == Opcode::Load) {
      lp.arity(ops, 2, m);
      const auto [d, base] = lp.mem(ops[1]);
      ai.insn = Instruction::load(lp.reg(ops[0]), base, d);
    } else if (op == Opcode::Store) {
      lp.arity(ops, 2, m);
      const auto [d, base] = lp.mem(ops[0]);
      ai.insn = Instruction::store(base, d, lp.reg(ops[1]));
    } else if (op == Opcode::LoadX) {
      lp.arity(ops, 3, m);
      ai.insn = Instruction::loadx(lp.reg(ops[0]), lp.reg(ops[1]), lp.reg(ops[2]));
    } else if (op == Opcode::StoreX) {
      lp.arity(ops, 3, m);
      ai.insn = Instruction::storex(lp.reg(ops[0]), lp.reg(ops[1]), lp.reg(ops[2]));
    } else if (op == Opcode::MtSpr) {
      lp.arity(ops, 2, m);
      const auto bit = lp.imm(ops[0]);
      const auto val = lp.imm(ops[1]);
      if (bit != static_cast<std::int32_t>(kSprGeb) && bit != static_cast<std::int32_t>(kSprPhwe)) {
        lp.fail("mtspr: only SPR bits 17 and 18 exist");
      }
      if (val != 0 && val != 1) lp.fail("mtspr: value must be 0 or 1");
      ai.insn = Instruction::mtspr(static_cast<unsigned>(bit), val != 0);
    } else if (op == Opcode::MfSpr) {
      lp.arity(ops, 2, m);
      const auto bit = lp.imm(ops[1]);
      if (bit != static_cast<std::int32_t>(kSprGeb) && bit != static_cast<std::int32_t>(kSprPhwe)) {
        lp.fail("mfspr: only SPR bits 17 and 18 exist");
      }
      ai.insn = Instruction::mfspr(lp.reg(ops[0]), static_cast<unsigned>(bit));
    } else if (is_branch(op)) {
      lp.arity(ops, 3, m);
      std::int64_t off;
      if (parse_int(ops[2], off)) {
        ai.insn = Instruction::branch(op, lp.reg(ops[0]), lp.reg(ops[1]), static_cast<std::int32_t>(off));
      } else if (is_label_name(ops[2])) {
        ai.insn = Instruction::branch(op, lp.reg(ops[0]), lp.reg(ops[1]), 0);
        ai.target = ops[2];
      } else {
        lp.fail("bad branch target '" + ops[2] + "'");
      }
    } else if (op == Opcode::Jal) {
      lp.arity(ops, 1, m);
      std::int64_t addr;
      if (parse_int(ops[0], addr)) {
        if (addr % 4 != 0) lp.fail("jal target must be word aligned");
        ai.insn = Instruction::jal(static_cast<std::uint32_t>(addr / 4));
      } else if (is_label_name(ops[0])) {
        ai.insn = Instruction::jal(0);
        ai.target = ops[0];
      } else {
        lp.fail("bad jal target '" + ops[0] + "'");
      }
    } else if (op == Opcode::Jalr) {
      lp.arity(ops, 1, m);
      ai.insn = Instruction::jalr(lp.reg(ops[0]));
    } else {
      lp.arity(ops, 0, m);
      ai.insn = Instruction::halt();
    }
    prog.items.emplace_back(std::move(ai));
  }
  return prog;
}

std::string print_asm(const AsmProgram& program) {
  std::ostringstream out;
  char buf[32];
  out << ".entry " << program.entry_label << '\n';
  std::snprintf(buf, sizeof buf, "0x%08X", program.initial_sp);
  out << ".sp " << buf << '\n';
  for (const auto& item : program.items) {
    if (const auto* l = std::get_if<Label>(&item)) {
      out << l->name << ":\n";
      continue;
    }
    const auto& ai = std::get<AsmInsn>(item);
    std::string text;
    if (!ai.target.empty() && is_branch(ai.insn.op)) {
      text = std::string(mnemonic(ai.insn.op)) + " r" + std::to_string(ai.insn.ra) + ", r" +
             std::to_string(ai.insn.rb) + ", " + ai.target;
    } else if (!ai.target.empty()) {
      text = std::string(mnemonic(ai.insn.op)) + " " + ai.target;
    } else {
      text = disassemble(ai.insn);
    }
    out << "    " << text;
    if (ai.role != Role::Code) {
      out << std::string(text.size() < 28 ? 28 - text.size() : 1, ' ') << "; [" << to_string(ai.role) << "]";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace gandalf::assembly
