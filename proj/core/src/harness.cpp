#include "gandalf/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "gandalf/asm.hpp"
#include "gandalf/guard.hpp"
#include "gandalf/minig/parser.hpp"

namespace gandalf::harness {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string hex(Word w) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", w);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CorpusError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Word parse_word(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long n = std::stoll(v, &used, 0);
    if (used != v.size() || n < -2147483648LL || n > 0xFFFFFFFFLL) throw std::out_of_range(v);
    return static_cast<Word>(n);
  } catch (const std::logic_error&) {
    throw CorpusError("bad value for " + key + ": '" + v + "'");
  }
}

ModeExpectation::Status parse_status(const std::string& key, const std::string& v) {
  if (v == "completed") return ModeExpectation::Status::Completed;
  if (v == "corrupted") return ModeExpectation::Status::Corrupted;
  if (v == "trapped") return ModeExpectation::Status::Trapped;
  throw CorpusError("bad value for " + key + ": '" + v + "'");
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

double ratio(std::uint64_t a, std::uint64_t b) {
  return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
}

std::size_t variable_count(const minig::CompileOutput& out) {
  std::size_t n = 0;
  for (const auto& f : out.functions) {
    for (const auto& [name, off] : f.layout.scalar_slots) {
      if (name[0] != '$') ++n;
    }
    n += f.layout.block_index.size();
  }
  return n;
}

}  // namespace

const char* to_string(Category c) { return c == Category::Exploit ? "exploit" : "benign"; }

const char* to_string(ModeExpectation::Status s) {
  switch (s) {
    case ModeExpectation::Status::Completed: return "completed";
    case ModeExpectation::Status::Corrupted: return "corrupted";
    case ModeExpectation::Status::Trapped: return "trapped";
  }
  return "?";
}

CorpusEntry parse_manifest(const std::string& text, std::string name) {
  CorpusEntry e;
  e.name = std::move(name);
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CorpusError(e.name + ".expect:" + std::to_string(lineno) + ": expected key = value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  const auto cat = take("category");
  if (!cat) throw CorpusError(e.name + ": manifest lacks 'category'");
  if (*cat == "exploit") e.category = Category::Exploit;
  else if (*cat == "benign") e.category = Category::Benign;
  else throw CorpusError(e.name + ": bad category '" + *cat + "'");
  e.description = take("description").value_or("");

  for (const char* mode : {"gandalf", "plain"}) {
    ModeExpectation& m = std::string(mode) == "gandalf" ? e.with_gandalf : e.without_gandalf;
    const std::string p = mode;
    const auto status = take(p + ".status");
    if (!status) throw CorpusError(e.name + ": manifest lacks '" + p + ".status'");
    m.status = parse_status(p + ".status", *status);
    if (auto v = take(p + ".exit")) m.exit_value = parse_word(p + ".exit", *v);
    m.reason = take(p + ".reason");
    if (m.status == ModeExpectation::Status::Corrupted && !m.exit_value) {
      throw CorpusError(e.name + ": corrupted expectation needs '" + p + ".exit' (the sentinel)");
    }
  }
  if (!kv.empty()) throw CorpusError(e.name + ": unknown manifest key '" + kv.begin()->first + "'");

  if (e.category == Category::Exploit) {
    if (e.with_gandalf.status != ModeExpectation::Status::Trapped) {
      throw CorpusError(e.name + ": exploit entries must expect a trap with the guard on");
    }
    if (e.without_gandalf.status == ModeExpectation::Status::Trapped) {
      throw CorpusError(e.name + ": exploit entries must not trap with the guard off");
    }
  } else if (e.with_gandalf.status != ModeExpectation::Status::Completed ||
             e.without_gandalf.status != ModeExpectation::Status::Completed) {
    throw CorpusError(e.name + ": benign entries must complete in both modes");
  }
  return e;
}

CorpusEntry load_entry(const fs::path& source_path) {
  fs::path manifest = source_path;
  manifest.replace_extension(".expect");
  CorpusEntry e = parse_manifest(read_file(manifest), source_path.stem().string());
  e.source = read_file(source_path);
  e.path = source_path;
  return e;
}

std::vector<CorpusEntry> load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw CorpusError(dir.string() + " is not a directory");
  std::vector<fs::path> sources;
  for (const auto& de : fs::recursive_directory_iterator(dir)) {
    if (de.is_regular_file() && de.path().extension() == ".mg") sources.push_back(de.path());
  }
  std::vector<CorpusEntry> entries;
  for (const auto& p : sources) entries.push_back(load_entry(p));
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].name == entries[i - 1].name) throw CorpusError("duplicate entry name " + entries[i].name);
  }
  return entries;
}

HeaderSweep sweep_headers(const minig::CompileOutput& instrumented, const memsys::CostConfig& cost,
                          std::uint64_t max_instructions) {
  HeaderSweep sweep;
  const auto labels = assembly::label_addresses(instrumented.program);
  const Image image = assembly::assemble(instrumented.program);
  const Word code_end = kCodeBase + static_cast<Word>(4 * image.code.size());

  // function start address -> layout
  std::map<Word, const minig::FrameLayout*> starts;
  for (const auto& f : instrumented.functions) starts[labels.at(f.name)] = &f.layout;

  MachineState state = load_image(image);
  memsys::MemSystem memsys(cost);
  sim::SimOptions opts;
  opts.max_instructions = max_instructions;
  opts.on_retire = [&](const MachineState& st, const Instruction& insn, Word pc) {
    if (insn.op != Opcode::MtSpr || insn.spr != kSprPhwe || insn.imm != 0) return;
    auto it = starts.upper_bound(pc);
    if (it == starts.begin() || pc >= code_end) return;
    const minig::FrameLayout& layout = *std::prev(it)->second;
    ++sweep.prologues;
    const Word sp = st.reg(kRegSp);
    for (const auto& b : layout.blocks) {
      if (b.header_offset < 0) continue;
      ++sweep.blocks_checked;
      const Word hdr = sp + static_cast<Word>(b.header_offset);
      const Word data = sp + static_cast<Word>(b.data_offset);
      const Word magic = memsys.peek(st.mem, hdr);
      const Word base = memsys.peek(st.mem, hdr + 4);
      const Word bound = memsys.peek(st.mem, hdr + 8);
      if (magic == hdr && base == data - 1 && bound == data + b.size && base < bound) {
        ++sweep.blocks_ok;
      } else {
        sweep.failures.push_back(layout.function + "." + b.name + " at " + hex(hdr) + ": magic=" + hex(magic) +
                                 " base=" + hex(base) + " bound=" + hex(bound));
      }
    }
  };
  sim::run_state(state, memsys, opts);
  return sweep;
}

double ConfigRun::cycle_ratio() const { return ratio(gandalf.outcome.cycles, plain.outcome.cycles); }

Images build(const std::string& source) {
  const minig::Program program = minig::parse(source);
  Images im{minig::compile(program, true), minig::compile(program, false), {}, {}};
  im.gandalf_image = assembly::assemble(im.instrumented.program);
  im.plain_image = assembly::assemble(im.plain.program);
  return im;
}

ModeRun run_mode(const Image& image, const memsys::CostConfig& cost, std::uint64_t max_instructions) {
  ModeRun r;
  sim::SimOptions opts;
  opts.max_instructions = max_instructions;
  opts.on_check = [&](const sim::CheckEvent& ev) {
    ++r.tally.checks;
    if (ev.result.allowed()) ++r.tally.allowed;
    r.tally.predicted_reads += guard::header_read_count(ev.result);
    r.tally.event_reads += ev.reads;
  };
  r.outcome = sim::run(image, cost, opts);
  return r;
}

std::vector<std::string> check_expectation(const ModeExpectation& expect, const sim::RunOutcome& outcome,
                                           const std::string& mode) {
  std::vector<std::string> f;
  const bool trapped = outcome.status == sim::RunStatus::Trapped;
  if (outcome.status == sim::RunStatus::LimitExceeded) {
    f.push_back(mode + ": instruction limit exceeded");
    return f;
  }
  if (expect.status == ModeExpectation::Status::Trapped) {
    if (!trapped) {
      f.push_back(mode + ": expected a trap, program completed with exit " + std::to_string(outcome.exit_value));
      return f;
    }
    if (outcome.trap->kind != TrapKind::Mismatch) {
      f.push_back(mode + ": expected a mismatch trap, got " + std::string(to_string(outcome.trap->kind)));
    } else if (expect.reason && outcome.trap->reason != *expect.reason) {
      f.push_back(mode + ": expected reason " + *expect.reason + ", got " + outcome.trap->reason);
    }
    return f;
  }
  if (trapped) {
    f.push_back(mode + ": unexpected trap: " + outcome.trap->detail);
    return f;
  }
  if (expect.exit_value && outcome.exit_value != *expect.exit_value) {
    f.push_back(mode + ": expected exit " + std::to_string(static_cast<std::int32_t>(*expect.exit_value)) +
                ", got " + std::to_string(static_cast<std::int32_t>(outcome.exit_value)));
  }
  return f;
}

BloatStats measure_bloat(const std::vector<EntryResult>& results) {
  BloatStats s;
  std::vector<double> v;
  for (const auto& r : results) {
    s.per_entry.emplace_back(r.name, r.size_bloat);
    v.push_back(r.size_bloat);
  }
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  s.median = median(v);
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  return s;
}

std::vector<NamedConfig> default_sweep(const memsys::CostConfig& base) {
  std::vector<NamedConfig> out;
  for (bool regs : {false, true}) {
    memsys::CostConfig off = base;
    off.cache.enabled = false;
    off.headerregs_enabled = regs;
    out.push_back({std::string("nocache") + (regs ? "+regs" : ""), off});
    for (std::uint32_t size : {256u, 1024u, 4096u, 16384u}) {
      memsys::CostConfig c = base;
      c.cache.enabled = true;
      c.cache.total_size = std::max(size, c.cache.line_size);
      c.headerregs_enabled = regs;
      out.push_back({"cache" + std::to_string(size) + (regs ? "+regs" : ""), c});
    }
  }
  return out;
}

std::vector<OverheadRow> measure_overheads(const std::vector<CorpusEntry>& benign,
                                           const std::vector<NamedConfig>& sweep) {
  std::vector<std::pair<std::string, Images>> built;
  for (const auto& e : benign) {
    if (e.category == Category::Benign) built.emplace_back(e.name, build(e.source));
  }
  std::vector<OverheadRow> rows;
  for (const auto& cfg : sweep) {
    OverheadRow row;
    row.config = cfg.name;
    row.cache_enabled = cfg.cost.cache.enabled;
    row.cache_size = cfg.cost.cache.total_size;
    row.headerregs = cfg.cost.headerregs_enabled;
    double sum = 0.0;
    for (const auto& [name, im] : built) {
      const auto g = sim::run(im.gandalf_image, cfg.cost);
      const auto p = sim::run(im.plain_image, cfg.cost);
      OverheadPoint pt;
      pt.entry = name;
      pt.gandalf_cycles = g.cycles;
      pt.plain_cycles = p.cycles;
      pt.cycle_ratio = ratio(g.cycles, p.cycles);
      pt.header_reads = g.mem_stats.header_reads;
      pt.header_reg_hits = g.mem_stats.header_reg_hits;
      pt.hit_rate = ratio(g.mem_stats.cache_hits, g.mem_stats.cache_hits + g.mem_stats.cache_misses);
      sum += pt.cycle_ratio;
      row.total_header_reads += pt.header_reads;
      row.points.push_back(pt);
    }
    row.mean_ratio = built.empty() ? 0.0 : sum / static_cast<double>(built.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

HeaderRegBenefit header_register_benefit(const CorpusEntry& entry, const memsys::CostConfig& base) {
  const Images im = build(entry.source);
  memsys::CostConfig off = base;
  off.headerregs_enabled = false;
  memsys::CostConfig on = base;
  on.headerregs_enabled = true;
  HeaderRegBenefit b;
  b.entry = entry.name;
  b.reads_without = sim::run(im.gandalf_image, off).mem_stats.header_reads;
  b.reads_with = sim::run(im.gandalf_image, on).mem_stats.header_reads;
  b.reduction = b.reads_without == 0 ? 0.0 : 1.0 - ratio(b.reads_with, b.reads_without);
  return b;
}

std::size_t RunReport::count(Category c) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [&](const auto& e) { return e.category == c; }));
}

std::size_t RunReport::passed() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.passed(); }));
}

double RunReport::mean_cycle_overhead() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& e : entries) {
    if (e.category != Category::Benign || e.runs.empty()) continue;
    sum += e.runs.front().cycle_ratio() - 1.0;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double RunReport::trap_rate(Category c, bool gandalf) const {
  std::size_t n = 0;
  std::size_t trapped = 0;
  for (const auto& e : entries) {
    if (e.category != c || e.runs.empty()) continue;
    ++n;
    const auto& o = gandalf ? e.runs.front().gandalf.outcome : e.runs.front().plain.outcome;
    if (o.status == sim::RunStatus::Trapped) ++trapped;
  }
  return n == 0 ? 0.0 : static_cast<double>(trapped) / static_cast<double>(n);
}

RunReport run_corpus(const std::vector<CorpusEntry>& entries, const std::vector<NamedConfig>& configs,
                     const CorpusOptions& options) {
  RunReport report;
  report.configs = configs;
  if (configs.empty()) report.configs.push_back({"default", {}});

  for (const auto& entry : entries) {
    EntryResult r;
    r.name = entry.name;
    r.category = entry.category;
    r.description = entry.description;
    Images im;
    try {
      im = build(entry.source);
    } catch (const std::exception& ex) {
      r.failures.push_back(std::string("compile: ") + ex.what());
      report.suite_errors.push_back(entry.name + ": " + ex.what());
      report.entries.push_back(std::move(r));
      continue;
    }
    r.instrumented_count = im.instrumented.instrumented_count;
    r.plain_count = im.instrumented.plain_count;
    r.boilerplate_count = im.instrumented.boilerplate_count;
    r.size_bloat = im.instrumented.size_bloat();
    r.variable_count = variable_count(im.instrumented);
    r.header_sweep = sweep_headers(im.instrumented, report.configs.front().cost, options.max_instructions);
    for (const auto& f : r.header_sweep.failures) r.failures.push_back("header sweep: " + f);

    std::optional<Word> first_exit;
    for (const auto& cfg : report.configs) {
      ConfigRun run;
      run.config = cfg.name;
      run.gandalf = run_mode(im.gandalf_image, cfg.cost, options.max_instructions);
      run.plain = run_mode(im.plain_image, cfg.cost, options.max_instructions);
      for (auto& f : check_expectation(entry.with_gandalf, run.gandalf.outcome, "gandalf")) {
        r.failures.push_back(cfg.name + ": " + f);
      }
      for (auto& f : check_expectation(entry.without_gandalf, run.plain.outcome, "plain")) {
        r.failures.push_back(cfg.name + ": " + f);
      }
      if (entry.category == Category::Benign) {
        const Word g = run.gandalf.outcome.exit_value;
        if (g != run.plain.outcome.exit_value) {
          r.failures.push_back(cfg.name + ": exit values differ between builds");
        }
        if (first_exit && *first_exit != g) r.failures.push_back(cfg.name + ": exit value depends on cost config");
        first_exit = g;
      }
      if (!cfg.cost.headerregs_enabled && run.gandalf.tally.predicted_reads != run.gandalf.outcome.mem_stats.header_reads) {
        r.failures.push_back(cfg.name + ": header_reads does not match the per-check count");
      }
      r.runs.push_back(std::move(run));
    }
    report.entries.push_back(std::move(r));
  }

  report.bloat = measure_bloat(report.entries);
  if (options.sweep) {
    std::vector<CorpusEntry> benign;
    for (const auto& e : entries) {
      if (e.category == Category::Benign) benign.push_back(e);
    }
    try {
      report.cache_sensitivity = measure_overheads(benign, default_sweep(report.configs.front().cost));
      for (const auto& e : benign) {
        report.header_register_benefit.push_back(header_register_benefit(e, report.configs.front().cost));
      }
    } catch (const std::exception& ex) {
      report.suite_errors.push_back(std::string("overhead sweep: ") + ex.what());
    }
  }
  return report;
}

namespace {

json cost_json(const memsys::CostConfig& c) {
  return json{{"cache.enabled", c.cache.enabled},
              {"cache.size", c.cache.total_size},
              {"cache.line", c.cache.line_size},
              {"cache.hit", c.cache.hit_cycles},
              {"cache.miss", c.cache.miss_cycles},
              {"storebuf.capacity", c.storebuf_capacity},
              {"storebuf.drain", c.storebuf_drain_per_cycle},
              {"headerregs.enabled", c.headerregs_enabled},
              {"base.cycles", c.base_cycles}};
}

json stats_json(const memsys::MemStats& s) {
  return json{{"data_reads", s.data_reads},
              {"data_writes", s.data_writes},
              {"header_reads", s.header_reads},
              {"cache_hits", s.cache_hits},
              {"cache_misses", s.cache_misses},
              {"header_reg_hits", s.header_reg_hits},
              {"store_forwards", s.store_forwards},
              {"storebuf_stall_cycles", s.storebuf_stall_cycles},
              {"total_mem_cycles", s.total_mem_cycles}};
}

json outcome_json(const sim::RunOutcome& o) {
  json j{{"status", sim::to_string(o.status)},
         {"exit_value", o.exit_value},
         {"cycles", o.cycles},
         {"instructions", o.instructions},
         {"mem_stats", stats_json(o.mem_stats)}};
  if (o.trap) {
    j["trap"] = json{{"kind", to_string(o.trap->kind)},
                     {"reason", o.trap->reason},
                     {"pc", o.trap->pc},
                     {"effective_address", o.trap->effective_address},
                     {"object_base", o.trap->object_base},
                     {"detail", o.trap->detail}};
  } else {
    j["trap"] = nullptr;
  }
  return j;
}

json overhead_rows_json(const std::vector<OverheadRow>& rows) {
  json sens = json::array();
  for (const auto& row : rows) {
    json pts = json::array();
    for (const auto& p : row.points) {
      pts.push_back(json{{"entry", p.entry},
                         {"cycle_ratio", p.cycle_ratio},
                         {"gandalf_cycles", p.gandalf_cycles},
                         {"plain_cycles", p.plain_cycles},
                         {"header_reads", p.header_reads},
                         {"header_reg_hits", p.header_reg_hits},
                         {"hit_rate", p.hit_rate}});
    }
    sens.push_back(json{{"config", row.config},
                        {"cache_enabled", row.cache_enabled},
                        {"cache_size", row.cache_size},
                        {"headerregs", row.headerregs},
                        {"mean_ratio", row.mean_ratio},
                        {"total_header_reads", row.total_header_reads},
                        {"points", pts}});
  }
  return sens;
}

json benefit_json(const std::vector<HeaderRegBenefit>& benefits) {
  json out = json::array();
  for (const auto& b : benefits) {
    out.push_back(json{{"entry", b.entry},
                       {"header_reads_without", b.reads_without},
                       {"header_reads_with", b.reads_with},
                       {"reduction", b.reduction}});
  }
  return out;
}

json configs_json(const std::vector<NamedConfig>& configs) {
  json out = json::array();
  for (const auto& c : configs) out.push_back(json{{"name", c.name}, {"params", cost_json(c.cost)}});
  return out;
}

}  // namespace

std::string cost_to_json(const memsys::CostConfig& cost) { return cost_json(cost).dump(); }

std::string outcome_to_json(const sim::RunOutcome& outcome) { return outcome_json(outcome).dump(2) + "\n"; }

std::string report_to_json(const RunReport& report) {
  json j;
  j["format"] = "gandalf-run-report";
  j["version"] = 1;
  j["cost_configs"] = configs_json(report.configs);

  json entries = json::array();
  for (const auto& e : report.entries) {
    json runs = json::array();
    for (const auto& r : e.runs) {
      runs.push_back(json{{"config", r.config},
                          {"gandalf", outcome_json(r.gandalf.outcome)},
                          {"plain", outcome_json(r.plain.outcome)},
                          {"checks", r.gandalf.tally.checks},
                          {"allowed_checks", r.gandalf.tally.allowed},
                          {"cycle_ratio", r.cycle_ratio()}});
    }
    entries.push_back(json{{"name", e.name},
                           {"category", to_string(e.category)},
                           {"description", e.description},
                           {"passed", e.passed()},
                           {"failures", e.failures},
                           {"instrumented_count", e.instrumented_count},
                           {"plain_count", e.plain_count},
                           {"boilerplate_count", e.boilerplate_count},
                           {"variable_count", e.variable_count},
                           {"size_bloat", e.size_bloat},
                           {"header_sweep",
                            json{{"prologues", e.header_sweep.prologues},
                                 {"blocks_checked", e.header_sweep.blocks_checked},
                                 {"blocks_ok", e.header_sweep.blocks_ok}}},
                           {"runs", runs}});
  }
  j["entries"] = entries;

  const std::size_t n = report.entries.size();
  json bloat{{"mean", report.bloat.mean},
             {"median", report.bloat.median},
             {"min", report.bloat.min},
             {"max", report.bloat.max},
             {"reference_claim", "size increase below 30%"},
             {"compiler_regime", "naive, unoptimized three-address code"}};
  j["aggregate"] = json{{"entries", n},
                        {"exploits", report.count(Category::Exploit)},
                        {"benign", report.count(Category::Benign)},
                        {"passed", report.passed()},
                        {"pass_rate", n == 0 ? 0.0 : static_cast<double>(report.passed()) / static_cast<double>(n)},
                        {"exploit_trap_rate_gandalf", report.trap_rate(Category::Exploit, true)},
                        {"exploit_trap_rate_plain", report.trap_rate(Category::Exploit, false)},
                        {"benign_trap_rate_gandalf", report.trap_rate(Category::Benign, true)},
                        {"mean_cycle_overhead", report.mean_cycle_overhead()},
                        {"bloat", bloat}};

  j["cache_sensitivity"] = overhead_rows_json(report.cache_sensitivity);
  j["header_register_benefit"] = benefit_json(report.header_register_benefit);
  j["suite_errors"] = report.suite_errors;
  j["all_passed"] = report.all_passed();
  return j.dump(2) + "\n";
}

std::string report_to_csv(const RunReport& report) {
  std::ostringstream out;
  out << "entry,category,config,passed,gandalf_status,gandalf_reason,gandalf_exit,plain_status,plain_exit,"
         "gandalf_cycles,plain_cycles,cycle_ratio,header_reads,instrumented_count,plain_count,size_bloat\n";
  for (const auto& e : report.entries) {
    for (const auto& r : e.runs) {
      const auto& g = r.gandalf.outcome;
      const auto& p = r.plain.outcome;
      char ratio_buf[32];
      char bloat_buf[32];
      std::snprintf(ratio_buf, sizeof ratio_buf, "%.6f", r.cycle_ratio());
      std::snprintf(bloat_buf, sizeof bloat_buf, "%.6f", e.size_bloat);
      out << e.name << ',' << to_string(e.category) << ',' << r.config << ',' << (e.passed() ? 1 : 0) << ','
          << sim::to_string(g.status) << ',' << (g.trap ? g.trap->reason : "") << ','
          << static_cast<std::int32_t>(g.exit_value) << ',' << sim::to_string(p.status) << ','
          << static_cast<std::int32_t>(p.exit_value) << ',' << g.cycles << ',' << p.cycles << ',' << ratio_buf
          << ',' << g.mem_stats.header_reads << ',' << e.instrumented_count << ',' << e.plain_count << ','
          << bloat_buf << '\n';
    }
  }
  return out.str();
}

std::string bench_to_json(const std::vector<NamedConfig>& configs, const std::vector<OverheadRow>& rows,
                          const std::vector<HeaderRegBenefit>& benefits) {
  json j;
  j["format"] = "gandalf-bench-report";
  j["version"] = 1;
  j["cost_configs"] = configs_json(configs);
  j["rows"] = overhead_rows_json(rows);
  j["header_register_benefit"] = benefit_json(benefits);
  return j.dump(2) + "\n";
}

}  // namespace gandalf::harness
