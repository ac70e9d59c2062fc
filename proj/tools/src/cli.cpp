#include "gandalf/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "gandalf/asm.hpp"
#include "gandalf/guard.hpp"
#include "gandalf/harness.hpp"
#include "gandalf/machine.hpp"
#include "gandalf/memsys.hpp"
#include "gandalf/minig/compiler.hpp"
#include "gandalf/minig/parser.hpp"
#include "gandalf/simulator.hpp"

namespace gandalf::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kCostEnv = "GANDALF_COST_CONFIG";

std::string hex(Word w) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", w);
  return buf;
}

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

memsys::CostConfig base_cost() {
  if (const char* path = std::getenv(kCostEnv); path && *path) {
    try {
      return memsys::CostConfig::from_file(path);
    } catch (const std::exception& e) {
      throw UsageError(std::string(kCostEnv) + ": " + e.what());
    }
  }
  return {};
}

struct CostFlags {
  std::string cache;
  bool headerregs = false;
  std::vector<std::string> settings;

  memsys::CostConfig apply(memsys::CostConfig c) const {
    try {
      if (!cache.empty()) {
        if (cache == "off") {
          c.set("cache.enabled", "false");
        } else {
          c.set("cache.enabled", "true");
          c.set("cache.size", cache);
        }
      }
      if (headerregs) c.headerregs_enabled = true;
      for (const auto& s : settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
        c.set(s.substr(0, eq), s.substr(eq + 1));
      }
      c.validate();
    } catch (const memsys::ConfigError& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

void add_cost_flags(CLI::App* cmd, CostFlags& flags) {
  cmd->add_option("--cache", flags.cache, "L1 cache: 'off' or total size in bytes");
  cmd->add_flag("--headerregs", flags.headerregs, "enable the on-chip header registers");
  cmd->add_option("--set", flags.settings, "override a cost parameter (key=value, repeatable)");
}

json layout_json(const minig::CompileOutput& out, Word initial_sp) {
  json fns = json::array();
  for (const auto& f : out.functions) {
    const auto& l = f.layout;
    const bool is_main = f.name == "main";
    const Word sp = initial_sp - l.frame_size;
    json blocks = json::array();
    for (const auto& b : l.blocks) {
      json jb{{"name", b.name},
              {"kind", minig::to_string(b.kind)},
              {"header_offset", b.header_offset >= 0 ? json(b.header_offset) : json(nullptr)},
              {"data_offset", b.data_offset},
              {"size", b.size}};
      if (is_main) {
        const Word data = sp + static_cast<Word>(b.data_offset);
        jb["data_addr"] = data;
        if (b.header_offset >= 0) {
          const auto a = guard::header_addresses_unchecked(data);
          jb["magic_addr"] = a.magic_addr;
          jb["base_addr"] = a.base_addr;
          jb["bound_addr"] = a.bound_addr;
          jb["base_value"] = data - 1;
          jb["bound_value"] = data + b.size;
        }
      }
      blocks.push_back(jb);
    }
    json slots = json::object();
    for (const auto& [name, off] : l.scalar_slots) slots[name] = off;
    json jf{{"name", f.name},
            {"frame_size", l.frame_size},
            {"fp_offset", l.fp_offset},
            {"header_bytes", l.header_bytes()},
            {"data_bytes", l.data_bytes()},
            {"instrumented_count", f.instrumented_count},
            {"plain_count", f.plain_count},
            {"scalar_slots", slots},
            {"blocks", blocks}};
    if (is_main) jf["sp"] = sp;
    fns.push_back(jf);
  }
  return json{{"gandalf", out.gandalf},
              {"initial_sp", initial_sp},
              {"instrumented_count", out.instrumented_count},
              {"plain_count", out.plain_count},
              {"boilerplate_count", out.boilerplate_count},
              {"size_bloat", out.size_bloat()},
              {"functions", fns}};
}

// ---- compile ---------------------------------------------------------------

struct CompileArgs {
  std::string source;
  bool gandalf = false;
  std::string output;
  bool emit_asm = false;
  bool dump_layout = false;
};

int do_compile(const CompileArgs& a, std::ostream& out, std::ostream& err) {
  std::string text;
  try {
    text = read_text(a.source);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  assembly::AsmProgram program;
  std::optional<minig::CompileOutput> compiled;
  try {
    if (fs::path(a.source).extension() == ".s") {
      if (a.dump_layout) throw UsageError("--dump-layout needs a mini-G source");
      program = assembly::parse_asm(text);
    } else {
      compiled = minig::compile_source(text, a.gandalf);
      program = compiled->program;
    }
    const Image image = assembly::assemble(program);
    std::string output = a.output;
    if (output.empty() && !a.emit_asm && !a.dump_layout) {
      output = fs::path(a.source).replace_extension(".img").string();
    }
    if (!output.empty()) write_image_file(image, output);
    if (a.emit_asm) out << assembly::print_asm(program);
    if (a.dump_layout) out << layout_json(*compiled, program.initial_sp).dump(2) << '\n';
    if (!output.empty() && !a.emit_asm && !a.dump_layout) {
      out << "wrote " << output << " (" << image.code.size() << " instructions";
      if (compiled) out << ", size bloat " << fixed(compiled->size_bloat() * 100.0, 1) << "%";
      out << ")\n";
    }
  } catch (const minig::SyntaxError& e) {
    err << a.source << ":" << e.what() << '\n';
    return kUsage;
  } catch (const minig::CompileError& e) {
    err << a.source << ":" << e.what() << '\n';
    return kUsage;
  } catch (const assembly::AsmError& e) {
    err << a.source << ": " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}

// ---- run -------------------------------------------------------------------

struct RunArgs {
  std::string image;
  bool trace = false;
  std::uint64_t max_insns = sim::kDefaultMaxInstructions;
  bool json = false;
  CostFlags cost;
};

int do_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  Image image;
  memsys::CostConfig cost;
  try {
    image = read_image_file(a.image);
    cost = a.cost.apply(base_cost());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  sim::SimOptions opts;
  opts.max_instructions = a.max_insns;
  if (a.trace) opts.trace = &out;
  const sim::RunOutcome o = sim::run(image, cost, opts);

  if (a.json) {
    json j = json::parse(harness::outcome_to_json(o));
    j["cost"] = json::parse(harness::cost_to_json(cost));
    out << j.dump(2) << '\n';
  } else {
    const auto& s = o.mem_stats;
    out << "status: " << sim::to_string(o.status) << '\n'
        << "exit: " << static_cast<std::int32_t>(o.exit_value) << '\n'
        << "instructions: " << o.instructions << '\n'
        << "cycles: " << o.cycles << '\n'
        << "data_reads: " << s.data_reads << " data_writes: " << s.data_writes
        << " header_reads: " << s.header_reads << '\n'
        << "cache_hits: " << s.cache_hits << " cache_misses: " << s.cache_misses
        << " header_reg_hits: " << s.header_reg_hits << " store_forwards: " << s.store_forwards << '\n';
  }
  if (o.status == sim::RunStatus::Trapped) {
    const TrapRecord& t = *o.trap;
    err << "trap: " << to_string(t.kind);
    if (!t.reason.empty()) err << " (" << t.reason << ")";
    err << " pc=" << hex(t.pc) << " ea=" << hex(t.effective_address);
    if (t.kind == TrapKind::Mismatch) err << " object_base=" << hex(t.object_base);
    err << "\n  " << t.detail << '\n';
    return kTrapped;
  }
  if (o.status == sim::RunStatus::LimitExceeded) {
    err << "instruction limit of " << a.max_insns << " reached\n";
    return kTrapped;
  }
  return kOk;
}

// ---- corpus / bench ----------------------------------------------------------

struct CorpusArgs {
  std::string dir;
  std::string json_out;
  std::string csv_out;
  bool no_sweep = false;
  std::uint64_t max_insns = sim::kDefaultMaxInstructions;
};

int do_corpus(const CorpusArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<harness::CorpusEntry> entries;
  memsys::CostConfig cost;
  try {
    cost = base_cost();
    entries = harness::load_corpus(a.dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  harness::CorpusOptions opts;
  opts.sweep = !a.no_sweep;
  opts.max_instructions = a.max_insns;
  const harness::RunReport report = harness::run_corpus(entries, {{"default", cost}}, opts);

  for (const auto& e : report.entries) {
    out << (e.passed() ? "PASS " : "FAIL ") << e.name << " [" << harness::to_string(e.category) << "]";
    if (!e.runs.empty()) {
      const auto& g = e.runs.front().gandalf.outcome;
      const auto& p = e.runs.front().plain.outcome;
      out << " gandalf=" << sim::to_string(g.status);
      if (g.trap) out << "(" << g.trap->reason << ")";
      else out << "(" << static_cast<std::int32_t>(g.exit_value) << ")";
      out << " plain=" << sim::to_string(p.status) << "(" << static_cast<std::int32_t>(p.exit_value) << ")";
    }
    out << '\n';
    for (const auto& f : e.failures) out << "    " << f << '\n';
  }
  for (const auto& s : report.suite_errors) out << "error: " << s << '\n';
  out << report.passed() << "/" << report.entries.size() << " entries passed; median size bloat "
      << fixed(report.bloat.median * 100.0, 1) << "% (reference figure: below 30%)\n";

  try {
    if (!a.json_out.empty()) write_text(a.json_out, harness::report_to_json(report));
    if (!a.csv_out.empty()) write_text(a.csv_out, harness::report_to_csv(report));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  if (entries.empty()) {
    err << "error: no entries under " << a.dir << '\n';
    return kExpectationFailure;
  }
  return report.all_passed() ? kOk : kExpectationFailure;
}

struct BenchArgs {
  std::string dir;
  bool sweep = false;
  std::string json_out;
};

int do_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<harness::CorpusEntry> benign;
  memsys::CostConfig cost;
  try {
    cost = base_cost();
    for (auto& e : harness::load_corpus(a.dir)) {
      if (e.category == harness::Category::Benign) benign.push_back(std::move(e));
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  if (benign.empty()) {
    err << "error: no benign entries under " << a.dir << '\n';
    return kExpectationFailure;
  }

  std::vector<harness::NamedConfig> configs = a.sweep ? harness::default_sweep(cost)
                                                      : std::vector<harness::NamedConfig>{{"default", cost}};
  std::vector<harness::OverheadRow> rows;
  try {
    rows = harness::measure_overheads(benign, configs);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExpectationFailure;
  }

  bool ok = true;
  for (const auto& row : rows) {
    out << row.config << ": mean cycle ratio " << fixed(row.mean_ratio) << ", header reads "
        << row.total_header_reads << '\n';
    for (const auto& p : row.points) {
      out << "  " << p.entry << " ratio=" << fixed(p.cycle_ratio) << " gandalf=" << p.gandalf_cycles
          << " plain=" << p.plain_cycles << " header_reads=" << p.header_reads
          << " hit_rate=" << fixed(p.hit_rate) << '\n';
    }
  }
  // every benign entry must still complete identically in both builds
  for (const auto& e : benign) {
    const harness::Images im = harness::build(e.source);
    const auto g = sim::run(im.gandalf_image, cost);
    const auto p = sim::run(im.plain_image, cost);
    if (g.status != sim::RunStatus::Completed || p.status != sim::RunStatus::Completed ||
        g.exit_value != p.exit_value) {
      out << "FAIL " << e.name << ": builds disagree or did not complete\n";
      ok = false;
    }
  }

  std::vector<harness::HeaderRegBenefit> benefits;
  if (a.sweep) {
    for (const auto& e : benign) {
      const auto b = harness::header_register_benefit(e, cost);
      out << "header registers on " << b.entry << ": " << b.reads_without << " -> " << b.reads_with
          << " header reads (" << fixed(b.reduction * 100.0, 1) << "% fewer)\n";
      benefits.push_back(b);
    }
  }
  if (!a.json_out.empty()) {
    try {
      write_text(a.json_out, harness::bench_to_json(configs, rows, benefits));
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kUsage;
    }
  }
  return ok ? kOk : kExpectationFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Protection-header ISA simulator, mini-G compiler and corpus runner", "gandalf"};
  app.require_subcommand(1);
  app.footer(std::string("Environment: ") + kCostEnv + " names a key = value cost config file.\n"
             "Exit codes: 0 ok, 1 program trapped, 2 usage or compile error, 3 expectation failure.");

  CompileArgs ca;
  auto* compile = app.add_subcommand("compile", "compile mini-G (or .s assembly) to an image");
  compile->add_option("source", ca.source, "source file (.mg or .s)")->required();
  compile->add_flag("--gandalf", ca.gandalf, "emit protection headers and checks");
  compile->add_option("-o,--output", ca.output, "image path (default: source with .img)");
  compile->add_flag("--emit-asm", ca.emit_asm, "print the assembly listing");
  compile->add_flag("--dump-layout", ca.dump_layout, "print frame layouts as JSON");

  RunArgs ra;
  auto* runc = app.add_subcommand("run", "simulate an image");
  runc->add_option("image", ra.image, "image file")->required();
  runc->add_flag("--trace", ra.trace, "print every retired instruction and guard check");
  runc->add_option("--max-insns", ra.max_insns, "instruction limit")->check(CLI::PositiveNumber);
  runc->add_flag("--json", ra.json, "print the outcome as JSON");
  add_cost_flags(runc, ra.cost);

  CorpusArgs co;
  auto* corpus = app.add_subcommand("corpus", "run a corpus directory in both build modes");
  corpus->add_option("dir", co.dir, "corpus directory")->required();
  corpus->add_option("--json", co.json_out, "write the JSON report here");
  corpus->add_option("--csv", co.csv_out, "write the CSV summary here");
  corpus->add_flag("--no-sweep", co.no_sweep, "skip the cache sensitivity sweep");
  corpus->add_option("--max-insns", co.max_insns, "per-run instruction limit")->check(CLI::PositiveNumber);

  BenchArgs be;
  auto* bench = app.add_subcommand("bench", "measure cycle overheads of the benign entries");
  bench->add_option("dir", be.dir, "corpus directory")->required();
  bench->add_flag("--sweep", be.sweep, "sweep cache sizes and header registers");
  bench->add_option("--json", be.json_out, "write the overhead table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    out << (sub ? sub->help() : app.help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    err << (sub ? sub->help() : app.help());
    return kUsage;
  }

  try {
    if (*compile) return do_compile(ca, out, err);
    if (*runc) return do_run(ra, out, err);
    if (*corpus) return do_corpus(co, out, err);
    if (*bench) return do_bench(be, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace gandalf::cli
