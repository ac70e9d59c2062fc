#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gandalf/asm.hpp"
#include "gandalf/harness.hpp"
#include "gandalf/minig/compiler.hpp"
#include "gandalf/minig/parser.hpp"
#include "gandalf/simulator.hpp"
#include "program_gen.hpp"

using namespace gandalf;
using namespace gandalf::minig;

namespace {

FrameLayout layout_of(const std::string& src, const std::string& fn, bool gandalf) {
  const Program p = parse(src);
  return layout_frame(*p.find(fn), gandalf);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::filesystem::path> corpus_sources() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(GANDALF_CORPUS_DIR)) {
    if (e.path().extension() == ".mg") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

sim::RunOutcome run_src(const std::string& src, bool gandalf) {
  return sim::run(assembly::assemble(compile_source(src, gandalf).program));
}

}  // namespace

TEST(Layout, OneScalarFrameIs36Bytes) {
  const auto l = layout_of("int main() { int x = 1; return x; }", "main", true);
  EXPECT_EQ(l.frame_size, 36u);
  ASSERT_EQ(l.blocks.size(), 2u);
  EXPECT_EQ(l.blocks[0].kind, BlockKind::Scalars);
  EXPECT_EQ(l.blocks[0].header_offset, 0);
  EXPECT_EQ(l.blocks[0].data_offset, 12);
  EXPECT_EQ(l.blocks[0].size, 4u);
  EXPECT_EQ(l.blocks[1].kind, BlockKind::System);
  EXPECT_EQ(l.blocks[1].header_offset, 16);
  EXPECT_EQ(l.blocks[1].size, 8u);
  EXPECT_EQ(l.header_bytes(), 24u);
  EXPECT_EQ(l.data_bytes(), 12u);
  EXPECT_EQ(l.fp_offset, 12);
}

TEST(Layout, ArrayBlockIsHeaderPlusElements) {
  const auto l = layout_of("int main() { int a[4]; return 0; }", "main", true);
  const FrameBlock* b = l.find_block("a");
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(b->kind, BlockKind::Array);
  EXPECT_EQ(b->size, 16u);
  EXPECT_EQ(b->data_offset - b->header_offset, 12);
  // array block (28) + system block (20), no scalars
  EXPECT_EQ(l.frame_size, 48u);
}

TEST(Layout, PlainBuildHasNoHeaders) {
  const auto l = layout_of("int main() { int x; int a[3]; int *p; return 0; }", "main", false);
  EXPECT_EQ(l.header_bytes(), 0u);
  EXPECT_EQ(l.frame_size, 4u + 12u + 4u + 8u);
  for (const auto& b : l.blocks) EXPECT_EQ(b.header_offset, -1);
}

TEST(Layout, OrderIsPointersArraysScalarsSystem) {
  const auto l = layout_of("int f(int n, int *q) { int a[2]; int *p; int b[3]; int k; return 0; }", "f", true);
  std::vector<std::string> names;
  for (const auto& b : l.blocks) names.push_back(b.name);
  EXPECT_EQ(names, (std::vector<std::string>{"q", "p", "a", "b", "$frame", "$system"}));
  for (std::size_t i = 1; i < l.blocks.size(); ++i) {
    EXPECT_EQ(l.blocks[i].header_offset,
              l.blocks[i - 1].data_offset + static_cast<std::int32_t>(l.blocks[i - 1].size));
  }
  EXPECT_EQ(l.find_block("q")->size, 8u);
  EXPECT_EQ(l.scalar_slots.at("n"), 0);
  EXPECT_EQ(l.scalar_slots.at("k"), 4);
}

TEST(Layout, Rejections) {
  EXPECT_THROW(layout_of("int main() { int x; int x; return 0; }", "main", true), CompileError);
  EXPECT_THROW(layout_of("int main() { int a[4096]; int b[4096]; return 0; }", "main", true), CompileError);
}

TEST(Prologue, WritesExpectedHeaderWords) {
  FrameLayout l;
  l.gandalf = true;
  l.blocks.push_back(FrameBlock{"obj", BlockKind::Array, 0, 12, 16});
  assembly::AsmProgram p;
  p.label("_start");
  for (auto& i : emit_prologue(l)) p.items.emplace_back(i);
  p.emit(Instruction::halt());
  p.initial_sp = 0x80012344;
  MachineState st;
  const auto out = sim::run(assembly::assemble(p), {}, {}, &st);
  ASSERT_EQ(out.status, sim::RunStatus::Completed);
  EXPECT_EQ(st.mem.read_word(0x80012344), 0x80012344u);
  EXPECT_EQ(st.mem.read_word(0x80012348), 0x8001234Fu);
  EXPECT_EQ(st.mem.read_word(0x8001234C), 0x80012360u);
}

TEST(Prologue, Counts) {
  FrameLayout empty;
  EXPECT_EQ(emit_prologue(empty).size(), 2u);
  FrameLayout two;
  two.blocks.push_back(FrameBlock{"a", BlockKind::Array, 0, 12, 8});
  two.blocks.push_back(FrameBlock{"b", BlockKind::Array, 20, 32, 8});
  const auto insns = emit_prologue(two);
  EXPECT_EQ(insns.size(), 14u);
  EXPECT_EQ(std::count_if(insns.begin(), insns.end(), [](const auto& a) { return is_store(a.insn.op); }), 6);
  EXPECT_EQ(insns.front().insn, Instruction::mtspr(kSprPhwe, true));
  EXPECT_EQ(insns.back().insn, Instruction::mtspr(kSprPhwe, false));
}

TEST(Compiler, PhweWindowsContainOnlyHeaderStores) {
  for (const auto& path : corpus_sources()) {
    const auto out = compile_source(read_file(path), true);
    bool open = false;
    std::size_t windows = 0;
    for (const auto& item : out.program.items) {
      if (std::holds_alternative<assembly::Label>(item)) {
        EXPECT_FALSE(open) << path << ": label inside PHWE window";
        continue;
      }
      const auto& ai = std::get<assembly::AsmInsn>(item);
      if (ai.insn.op == Opcode::MtSpr && ai.insn.spr == kSprPhwe) {
        EXPECT_NE(open, ai.insn.imm != 0) << path;
        open = ai.insn.imm != 0;
        windows += open;
        continue;
      }
      if (!open) {
        EXPECT_NE(ai.role, assembly::Role::Header) << path;
        continue;
      }
      EXPECT_NE(ai.role, assembly::Role::Code) << path;
      EXPECT_TRUE(ai.insn.op == Opcode::AddI || ai.insn.op == Opcode::Store) << path << " " << disassemble(ai.insn);
      if (ai.insn.op == Opcode::AddI) EXPECT_TRUE(ai.insn.rd == 10 || ai.insn.rd == 12);
      if (ai.insn.op == Opcode::Store) EXPECT_EQ(ai.insn.ra, 12u);
    }
    EXPECT_FALSE(open) << path;
    EXPECT_EQ(windows, out.functions.size()) << path;
  }
}

TEST(Compiler, BoilerplateIsOnePlusTenPerFunction) {
  for (const auto& path : corpus_sources()) {
    const auto out = compile_source(read_file(path), true);
    EXPECT_EQ(out.boilerplate_count, 1 + 10 * out.functions.size()) << path;
    EXPECT_EQ(out.program.count(assembly::Role::Boilerplate), out.boilerplate_count);
  }
}

TEST(Compiler, ZeroVariablesCostsOnlyBoilerplate) {
  const auto out = compile_source("int main() { return 40 + 2; }", true);
  EXPECT_EQ(out.instrumented_count - out.plain_count, out.boilerplate_count);
  EXPECT_EQ(out.program.count(assembly::Role::Header), 0u);
}

TEST(Compiler, PlainBuildHasNoInstrumentation) {
  for (const auto& path : corpus_sources()) {
    const auto out = compile_source(read_file(path), false);
    EXPECT_EQ(out.program.instruction_count(), out.plain_count);
    EXPECT_EQ(out.program.count(assembly::Role::Code), out.plain_count);
    for (const auto& item : out.program.items) {
      if (const auto* ai = std::get_if<assembly::AsmInsn>(&item)) EXPECT_NE(ai->insn.op, Opcode::MtSpr);
    }
  }
}

TEST(Compiler, BothCountsAgreeAcrossModes) {
  const std::string src = read_file(std::filesystem::path(GANDALF_CORPUS_DIR) / "benign/bubble_sort.mg");
  const auto g = compile_source(src, true);
  const auto p = compile_source(src, false);
  EXPECT_EQ(g.instrumented_count, p.instrumented_count);
  EXPECT_EQ(g.plain_count, p.plain_count);
  EXPECT_EQ(g.program.instruction_count(), g.instrumented_count);
  EXPECT_DOUBLE_EQ(g.size_bloat(), double(g.instrumented_count) / double(g.plain_count) - 1.0);
}

TEST(Compiler, SemanticErrors) {
  for (const char* src : {
           "int f() { return 0; }",                                  // no main
           "int main(int x) { return x; }",                          // main with params
           "int main() { return y; }",                               // undeclared
           "int main() { int a[2]; return a; }",                     // array as int
           "int main() { int x; int *p = x; return 0; }",            // int to pointer
           "int main() { return g(1); }",                            // unknown function
           "int f(int a) { return a; } int main() { return f(); }",  // arity
           "int f() { return 0; } int f() { return 1; } int main() { return 0; }",
           "int _start() { return 0; } int main() { return 0; }",
       }) {
    EXPECT_THROW(compile_source(src, true), CompileError) << src;
  }
}

TEST(Compiler, SimplePrograms) {
  const std::vector<std::pair<std::string, Word>> cases = {
      {"int main() { return 7 * 6; }", 42},
      {"int main() { return 0x12345678; }", 0x12345678},
      {"int main() { return -5 + 2; }", static_cast<Word>(-3)},
      {"int main() { int x = 3; if (x > 2) x = 10; else x = 20; return x; }", 10},
      {"int main() { return (3 < 4) + (4 <= 4) + (5 >= 6) + (1 != 1) + !0; }", 3},
      {"int main() { int a[3]; int *p = &a[1]; p[1] = 9; *p = 4; return a[1] * 10 + a[2]; }", 49},
      {"int sq(int v) { return v * v; } int main() { return sq(sq(2)) + sq(3); }", 25},
      {"int set(int *d, int v) { *d = v; return 0; } int main() { int x = 1; set(&x, 8); return x; }", 8},
      {"int main() { int i = 0; int s = 0; while (i < 100) { s = s + i; i = i + 1; } return s; }", 4950},
  };
  for (const auto& [src, want] : cases) {
    for (bool g : {true, false}) {
      const auto out = run_src(src, g);
      EXPECT_EQ(out.status, sim::RunStatus::Completed) << src;
      EXPECT_EQ(out.exit_value, want) << src << " gandalf=" << g;
    }
  }
}

TEST(Compiler, ModesAgreeOnGeneratedPrograms) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const std::string src = gen::benign_program(seed);
    const auto g = run_src(src, true);
    const auto p = run_src(src, false);
    ASSERT_EQ(g.status, sim::RunStatus::Completed) << "seed " << seed << "\n" << src;
    ASSERT_EQ(p.status, sim::RunStatus::Completed) << "seed " << seed;
    EXPECT_EQ(g.exit_value, p.exit_value) << "seed " << seed;
  }
}

TEST(Compiler, CalleeInheritsCallerHeader) {
  const std::string src = R"(
int get(int *p) { return p[1]; }
int main() {
  int a[4];
  a[1] = 5;
  return get(a);
}
)";
  const auto out = compile_source(src, true);
  const auto labels = assembly::label_addresses(out.program);
  const Word get_addr = labels.at("get");
  const Word main_addr = labels.at("main");
  std::vector<sim::CheckEvent> in_main, in_get;
  sim::SimOptions o;
  o.on_check = [&](const sim::CheckEvent& e) {
    if (e.pc >= get_addr && e.pc < main_addr) in_get.push_back(e);
    else if (e.pc >= main_addr) in_main.push_back(e);
  };
  const auto r = sim::run(assembly::assemble(out.program), {}, o);
  ASSERT_EQ(r.status, sim::RunStatus::Completed);
  EXPECT_EQ(r.exit_value, 5u);
  // a[1] in main and p[1] in get are both checked against a's header
  const FrameLayout& l = out.find_function("main")->layout;
  const Word a_data = out.program.initial_sp - l.frame_size + static_cast<Word>(l.find_block("a")->data_offset);
  auto is_elem = [&](const sim::CheckEvent& e) {
    return e.object_base == a_data && e.effective_address == a_data + 4 && e.result.allowed();
  };
  EXPECT_EQ(std::count_if(in_main.begin(), in_main.end(), is_elem), 1);
  EXPECT_EQ(std::count_if(in_get.begin(), in_get.end(), is_elem), 1);
}

TEST(Compiler, LongBodyBloatBelowCorpusMedian) {
  std::vector<double> bloats;
  double long_body = -1;
  for (const auto& path : corpus_sources()) {
    const auto out = compile_source(read_file(path), true);
    bloats.push_back(out.size_bloat());
    if (path.stem() == "long_body") long_body = out.size_bloat();
  }
  ASSERT_GE(long_body, 0.0);
  std::sort(bloats.begin(), bloats.end());
  const std::size_t n = bloats.size();
  const double median = n % 2 ? bloats[n / 2] : (bloats[n / 2 - 1] + bloats[n / 2]) / 2;
  EXPECT_LT(long_body, median);
}
