#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gandalf/machine.hpp"

namespace gandalf::assembly {

class AsmError : public std::runtime_error {
 public:
  AsmError(int line, const std::string& message)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Why an instruction exists. Used for bloat accounting and for the static
/// PHWE-bracketing check.
enum class Role : std::uint8_t {
  Code,         // ordinary program code (present in both build modes)
  Boilerplate,  // GEB enable, PHWE toggles, system-block header and addressing
  Header,       // per-variable header population
  Pointer,      // extra work for (object_base, byte_offset) pointer pairs
};

const char* to_string(Role role);

struct Label {
  std::string name;
};

struct AsmInsn {
  Instruction insn;
  /// Symbolic target for branches and jal; empty when `insn.imm` is final.
  std::string target;
  Role role = Role::Code;
  int line = 0;
};

using AsmItem = std::variant<Label, AsmInsn>;

struct AsmProgram {
  std::vector<AsmItem> items;
  std::string entry_label = "_start";
  Word initial_sp = kDefaultStackTop;

  void label(std::string name) { items.emplace_back(Label{std::move(name)}); }
  void emit(const Instruction& insn, Role role = Role::Code, std::string target = {}) {
    items.emplace_back(AsmInsn{insn, std::move(target), role, 0});
  }

  std::size_t instruction_count() const;
  std::size_t count(Role role) const;
};

/// Resolves labels and encodes. Code is placed at kCodeBase.
Image assemble(const AsmProgram& program);

/// Label name -> absolute address, as `assemble` would place them.
std::map<std::string, Word> label_addresses(const AsmProgram& program);

/// Text form: one instruction per line, `name:` label definitions, `;`
/// comments, `.entry <label>` and `.sp <value>` directives. Immediates are
/// decimal or 0x-prefixed hex.
AsmProgram parse_asm(std::string_view text);

/// Renders text that parse_asm accepts. Non-code roles are annotated in a
/// trailing comment.
std::string print_asm(const AsmProgram& program);

}  // namespace gandalf::assembly
