// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Usage: gandalf_acceptance <corpus-dir>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "gandalf/asm.hpp"
#include "gandalf/guard.hpp"
#include "gandalf/harness.hpp"
#include "gandalf/minig/compiler.hpp"
#include "gandalf/simulator.hpp"
#include "oracles.hpp"
#include "program_gen.hpp"

using namespace gandalf;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;
};

class MapView : public MemoryView {
 public:
  explicit MapView(const std::map<Word, Word>& m) : m_(m) {}
  Word read_word(Word addr) const override {
    ++reads;
    auto it = m_.find(addr);
    return it == m_.end() ? 0 : it->second;
  }
  mutable unsigned reads = 0;

 private:
  const std::map<Word, Word>& m_;
};

oracle::Verdict lib_to_oracle(guard::Verdict v) {
  switch (v) {
    case guard::Verdict::Allow: return oracle::Verdict::Allow;
    case guard::Verdict::BadMagic: return oracle::Verdict::BadMagic;
    case guard::Verdict::BelowBase: return oracle::Verdict::BelowBase;
    case guard::Verdict::AboveBound: return oracle::Verdict::AboveBound;
  }
  return oracle::Verdict::Allow;
}

char buf[512];

template <typename... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

// 1 -------------------------------------------------------------------------

Verdict oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  auto u32 = [&] { return static_cast<Word>(rng()); };
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
  const int kTuples = 200'000;
  int disagreements = 0;
  std::map<oracle::Verdict, int> seen;
  for (int i = 0; i < kTuples; ++i) {
    const bool geb = pick(8) != 0;
    const bool phwe = pick(4) == 0;
    Word ob = pick(10) == 0 ? u32() & ~3u : 0x80000000u + (u32() & 0x000FFFFCu);
    std::map<Word, Word> mem;
    const Word size = 4 * (1 + pick(32));
    const int shape = pick(6);
    if (shape > 0) {
      // mostly well formed, sometimes perturbed
      Word magic = ob - 12, base = ob - 1, bound = ob + size;
      if (shape == 1) magic ^= 1u << pick(32);
      if (shape == 2) base = u32();
      if (shape == 3) bound = u32();
      mem[ob - 12] = magic;
      mem[ob - 8] = base;
      mem[ob - 4] = bound;
    } else {
      for (int k = 0; k < 3; ++k) mem[ob - 12 + 4 * k] = u32();
    }
    Word ea;
    switch (pick(4)) {
      case 0: ea = u32(); break;
      case 1: ea = ob + 4 * static_cast<Word>(pick(40)) - 64; break;
      case 2: ea = ob + size - 4 + 4 * static_cast<Word>(pick(3)); break;
      default: ea = ob + static_cast<Word>(pick(static_cast<int>(size) + 8)) - 4; break;
    }
    const auto ref = oracle::reference_check(
        geb, phwe,
        [&](Word a) {
          auto it = mem.find(a);
          return it == mem.end() ? 0u : it->second;
        },
        ob, ea);
    MapView view(mem);
    const auto got = guard::check_access(view, SprFlags{geb, phwe}, ob, ea);
    if (lib_to_oracle(got.verdict) != ref.verdict || view.reads != ref.reads ||
        guard::header_read_count(got) != ref.reads) {
      ++disagreements;
    }
    ++seen[ref.verdict];
  }
  const double t = seconds_since(t0);
  Verdict v;
  v.pass = disagreements == 0 && t < 10.0 && seen.size() == 4;
  v.detail = fmt("%d tuples, %d disagreements, verdict mix allow=%d magic=%d below=%d above=%d, %.2f s", kTuples,
                 disagreements, seen[oracle::Verdict::Allow], seen[oracle::Verdict::BadMagic],
                 seen[oracle::Verdict::BelowBase], seen[oracle::Verdict::AboveBound], t);
  return v;
}

// 2 -------------------------------------------------------------------------

Verdict boundary_exactness() {
  int exceptions = 0;
  int probes = 0;
  int simulated = 0;
  for (Word B : {0x80012350u, 0x00020010u, 0x7FFFFF00u}) {
    for (Word size = 4; size <= 64; size += 4) {
      Memory mem;
      const auto h = guard::make_header(B, size);
      const auto a = guard::derive_header_addresses(B);
      mem.write_word(a.magic_addr, h.magic);
      mem.write_word(a.base_addr, h.base_field);
      mem.write_word(a.bound_addr, h.bound_field);
      for (Word ea = B - 128; ea != B + size + 128; ea += 4) {
        const bool inside = ea >= B && ea <= B + size - 4;
        const bool allowed = guard::check_access(mem, SprFlags{true, false}, B, ea).allowed();
        ++probes;
        if (allowed != inside) ++exceptions;
      }
      for (Word ea : {a.magic_addr, a.base_addr, a.bound_addr, B + size}) {
        ++probes;
        if (guard::check_access(mem, SprFlags{true, false}, B, ea).allowed()) ++exceptions;
      }
      // the same sweep through the load-store unit for one base
      if (B != 0x80012350u) continue;
      for (Word ea = B - 16; ea != B + size + 16; ea += 4) {
        MachineState s = load_image(assembly::assemble(assembly::parse_asm("_start:\n mtspr 17, 1\n lwx r5, r3, r4\n halt\n")));
        s.mem.write_word(a.magic_addr, h.magic);
        s.mem.write_word(a.base_addr, h.base_field);
        s.mem.write_word(a.bound_addr, h.bound_field);
        s.regs[3] = B;
        s.regs[4] = ea - B;
        memsys::MemSystem ms;
        const auto out = sim::run_state(s, ms);
        const bool inside = ea >= B && ea <= B + size - 4;
        ++simulated;
        if ((out.status == sim::RunStatus::Completed) != inside) ++exceptions;
      }
    }
  }
  Verdict v;
  v.pass = exceptions == 0;
  v.detail = fmt("sizes 4-64 at 3 bases, %d guard probes + %d simulated loads, %d exceptions", probes, simulated,
                 exceptions);
  return v;
}

// 3 -------------------------------------------------------------------------

Verdict security_suite(const std::vector<harness::CorpusEntry>& corpus, harness::RunReport& report) {
  const auto t0 = Clock::now();
  report = harness::run_corpus(corpus, {{"default", {}}}, {.sweep = false});
  int exploits = 0, trapped_expected = 0, plain_trapped = 0, benign = 0, benign_ok = 0;
  bool past_end_case = false;
  for (const auto& e : report.entries) {
    const auto& entry = *std::find_if(corpus.begin(), corpus.end(), [&](const auto& c) { return c.name == e.name; });
    const auto& g = e.runs.front().gandalf.outcome;
    const auto& p = e.runs.front().plain.outcome;
    if (e.category == harness::Category::Exploit) {
      ++exploits;
      if (g.status == sim::RunStatus::Trapped && g.trap && entry.with_gandalf.reason &&
          g.trap->reason == *entry.with_gandalf.reason) {
        ++trapped_expected;
      }
      if (p.status != sim::RunStatus::Completed) ++plain_trapped;
      if (e.name == "pointer_past_end" && g.trap && g.trap->reason == "above-bound") past_end_case = true;
    } else {
      ++benign;
      if (g.status == sim::RunStatus::Completed && p.status == sim::RunStatus::Completed &&
          g.exit_value == p.exit_value && e.passed()) {
        ++benign_ok;
      }
    }
  }
  const double t = seconds_since(t0);
  Verdict v;
  v.pass = exploits >= 10 && trapped_expected == exploits && plain_trapped == 0 && benign >= 6 &&
           benign_ok == benign && past_end_case && report.all_passed() && t < 60.0;
  v.detail = fmt("exploits trapped %d/%d with expected reason, plain traps %d; benign identical %d/%d; "
                 "&a[14]+4 case %s; %.2f s",
                 trapped_expected, exploits, plain_trapped, benign_ok, benign,
                 past_end_case ? "above-bound" : "MISSING", t);
  return v;
}

// 4 -------------------------------------------------------------------------

Verdict header_self_check(const std::vector<harness::CorpusEntry>& corpus) {
  std::size_t blocks = 0, ok = 0, programs = 0, prologues = 0;
  std::string first_failure;
  for (const auto& e : corpus) {
    const auto im = harness::build(e.source);
    const auto s = harness::sweep_headers(im.instrumented);
    ++programs;
    blocks += s.blocks_checked;
    ok += s.blocks_ok;
    prologues += s.prologues;
    if (!s.failures.empty() && first_failure.empty()) first_failure = e.name + ": " + s.failures.front();
  }
  Verdict v;
  v.pass = blocks > 0 && ok == blocks && first_failure.empty();
  v.detail = fmt("%zu programs, %zu prologues, %zu/%zu headers self-identifying", programs, prologues, ok, blocks);
  if (!first_failure.empty()) v.detail += "; " + first_failure;
  return v;
}

// 5 -------------------------------------------------------------------------

Verdict overhead_accounting(const std::vector<harness::CorpusEntry>& benign) {
  std::size_t runs = 0, mismatches = 0;
  std::uint64_t total_reads = 0, total_allowed = 0;
  memsys::CostConfig nocache;
  nocache.cache.enabled = false;
  for (const auto& e : benign) {
    const auto im = harness::build(e.source);
    for (const auto& cost : {memsys::CostConfig{}, nocache}) {
      std::uint64_t per_check_sum = 0, allowed = 0;
      sim::SimOptions o;
      o.on_check = [&](const sim::CheckEvent& ev) {
        per_check_sum += guard::header_read_count(ev.result);
        allowed += ev.result.allowed();
      };
      const auto out = sim::run(im.gandalf_image, cost, o);
      ++runs;
      const auto reads = out.mem_stats.header_reads;
      if (reads != per_check_sum || reads != 3 * allowed || out.status != sim::RunStatus::Completed) ++mismatches;
      total_reads += reads;
      total_allowed += allowed;
    }
  }
  Verdict v;
  v.pass = runs > 0 && mismatches == 0;
  v.detail = fmt("%zu benign runs (cache on/off, header registers off): header_reads %llu = sum of per-check "
                 "counts = 3 x %llu allowed checks, %zu mismatches",
                 runs, static_cast<unsigned long long>(total_reads), static_cast<unsigned long long>(total_allowed),
                 mismatches);
  return v;
}

// 6 -------------------------------------------------------------------------

Verdict locality(const std::vector<harness::CorpusEntry>& benign) {
  memsys::CostConfig off;
  off.cache.enabled = false;
  const memsys::CostConfig on;
  std::size_t improved = 0;
  double sum_off = 0, sum_on = 0;
  std::string worst;
  for (const auto& e : benign) {
    const auto im = harness::build(e.source);
    auto ratio = [&](const memsys::CostConfig& c) {
      return double(sim::run(im.gandalf_image, c).cycles) / double(sim::run(im.plain_image, c).cycles);
    };
    const double r_off = ratio(off);
    const double r_on = ratio(on);
    sum_off += r_off;
    sum_on += r_on;
    if (r_on < r_off) ++improved;
    else if (worst.empty()) worst = e.name;
  }
  const auto tight = std::find_if(benign.begin(), benign.end(), [](const auto& e) { return e.name == "tight_loop"; });
  double reduction = 0;
  std::uint64_t without = 0, with = 0;
  if (tight != benign.end()) {
    const auto b = harness::header_register_benefit(*tight, {});
    without = b.reads_without;
    with = b.reads_with;
    reduction = b.reduction;
  }
  Verdict v;
  v.pass = improved == benign.size() && tight != benign.end() && reduction >= 0.90;
  v.detail = fmt("cache lowers ratio on %zu/%zu benign entries (mean %.3f -> %.3f); header registers on tight_loop: "
                 "header_reads %llu -> %llu (%.2f%% reduction)",
                 improved, benign.size(), sum_off / double(benign.size()), sum_on / double(benign.size()),
                 static_cast<unsigned long long>(without), static_cast<unsigned long long>(with), 100.0 * reduction);
  if (!worst.empty()) v.detail += "; not improved: " + worst;
  return v;
}

// 7 -------------------------------------------------------------------------

Verdict bloat(const harness::RunReport& report) {
  const auto stats = harness::measure_bloat(report.entries);
  std::size_t with_vars = 0, positive = 0, zero_var = 0, lower_bound_ok = 0, lower_bound_checked = 0;
  for (const auto& e : report.entries) {
    if (e.variable_count > 0) {
      ++with_vars;
      if (e.size_bloat > 0.0) ++positive;
    } else {
      ++zero_var;
    }
    ++lower_bound_checked;
    const std::size_t extra = e.instrumented_count - e.plain_count;
    if (e.variable_count == 0 ? extra == e.boilerplate_count : extra > e.boilerplate_count) ++lower_bound_ok;
  }
  Verdict v;
  v.pass = with_vars > 0 && positive == with_vars && zero_var > 0 && lower_bound_ok == lower_bound_checked;
  v.detail = fmt("measured median bloat %.1f%% (mean %.1f%%, range %.1f%%-%.1f%%) vs reference figure <30%%; "
                 "bloat > 0 on %zu/%zu programs with variables; boilerplate bound holds on %zu/%zu (%zu zero-variable)",
                 100 * stats.median, 100 * stats.mean, 100 * stats.min, 100 * stats.max, positive, with_vars,
                 lower_bound_ok, lower_bound_checked, zero_var);
  return v;
}

// 8 -------------------------------------------------------------------------

struct Solo {
  sim::RunOutcome outcome;
  MachineState final_state;
};

bool same_result(const sim::RunOutcome& a, const MachineState& sa, const sim::RunOutcome& b,
                 const MachineState& sb) {
  if (a.status != b.status || a.exit_value != b.exit_value || a.instructions != b.instructions) return false;
  if (a.trap.has_value() != b.trap.has_value()) return false;
  if (a.trap && (a.trap->reason != b.trap->reason || a.trap->pc != b.trap->pc ||
                 a.trap->effective_address != b.trap->effective_address)) {
    return false;
  }
  return sa.regs == sb.regs && sa.pc == sb.pc && sa.spr == sb.spr && sa.mem == sb.mem;
}

Verdict context_switching(const std::vector<harness::CorpusEntry>& corpus) {
  std::vector<std::pair<std::string, Image>> images;
  for (const auto& e : corpus) {
    const auto im = harness::build(e.source);
    images.emplace_back(e.name + "/gandalf", im.gandalf_image);
    images.emplace_back(e.name + "/plain", im.plain_image);
  }
  std::vector<Solo> solo;
  for (const auto& [name, image] : images) {
    Solo s;
    s.outcome = sim::run(image, {}, {}, &s.final_state);
    solo.push_back(std::move(s));
  }

  std::size_t schedules = 0, comparisons = 0, divergences = 0;
  std::string first;
  auto run_schedule = [&](const std::vector<std::size_t>& pick, const sim::SchedulerOptions& so) {
    std::vector<sim::ProcessContext> procs;
    for (std::size_t i : pick) procs.push_back(sim::make_process(images[i].first, images[i].second));
    memsys::MemSystem ms;
    const auto outs = sim::run_interleaved(procs, ms, so);
    ++schedules;
    std::size_t diverged = 0;
    for (std::size_t k = 0; k < pick.size(); ++k) {
      ++comparisons;
      if (!same_result(outs[k], procs[k].machine, solo[pick[k]].outcome, solo[pick[k]].final_state)) {
        ++diverged;
        if (first.empty()) first = images[pick[k]].first + fmt(" (quantum %llu)", (unsigned long long)so.quantum);
      }
    }
    return diverged;
  };

  std::mt19937 rng(8);
  for (std::uint64_t quantum : {1ull, 3ull, 17ull, 250ull}) {
    for (bool preempt : {false, true}) {
      for (int round = 0; round < 6; ++round) {
        std::vector<std::size_t> pick;
        for (int k = 0; k < 4; ++k) pick.push_back(rng() % images.size());
        sim::SchedulerOptions so;
        so.quantum = quantum;
        so.preempt_after_phwe_set = preempt;
        divergences += run_schedule(pick, so);
      }
    }
  }
  // every image paired with a plain attacker, preempted inside each PHWE window
  for (std::size_t i = 0; i < images.size(); ++i) {
    sim::SchedulerOptions so;
    so.quantum = 5;
    so.preempt_after_phwe_set = true;
    divergences += run_schedule({i, (i * 7 + 3) % images.size()}, so);
  }

  // negative control: a kernel that does not save the flags must diverge
  std::size_t control_divergences = 0;
  for (std::size_t i = 0; i + 1 < images.size(); i += 2) {
    sim::SchedulerOptions so;
    so.quantum = 1;
    so.preempt_after_phwe_set = true;
    so.save_restore_flags = false;
    std::vector<std::size_t> pick{i, (i + 3) % images.size()};
    std::vector<sim::ProcessContext> procs;
    for (std::size_t k : pick) procs.push_back(sim::make_process(images[k].first, images[k].second));
    memsys::MemSystem ms;
    const auto outs = sim::run_interleaved(procs, ms, so);
    for (std::size_t k = 0; k < pick.size(); ++k) {
      if (!same_result(outs[k], procs[k].machine, solo[pick[k]].outcome, solo[pick[k]].final_state)) {
        ++control_divergences;
      }
    }
  }

  Verdict v;
  v.pass = divergences == 0 && comparisons > 0 && control_divergences > 0;
  v.detail = fmt("%zu schedules, %zu process results, %zu divergences from solo runs (incl. preemption inside "
                 "PHWE windows); unsaved-flags control diverges in %zu results",
                 schedules, comparisons, divergences, control_divergences);
  if (!first.empty()) v.detail += "; first divergence: " + first;
  return v;
}

// 9 -------------------------------------------------------------------------

Verdict guard_transparency() {
  const auto t0 = Clock::now();
  const int kPrograms = 1200;
  int divergences = 0, failures = 0, checked_accesses = 0;
  std::string first;
  for (int seed = 0; seed < kPrograms; ++seed) {
    const std::string src = gen::benign_program(static_cast<std::uint64_t>(seed));
    Image gimg, pimg;
    try {
      gimg = assembly::assemble(minig::compile_source(src, true).program);
      pimg = assembly::assemble(minig::compile_source(src, false).program);
    } catch (const std::exception& e) {
      ++failures;
      if (first.empty()) first = fmt("seed %d: ", seed) + e.what();
      continue;
    }
    MachineState on_state, off_state;
    sim::SimOptions on_opts;
    std::uint64_t checks = 0;
    on_opts.on_check = [&](const sim::CheckEvent&) { ++checks; };
    sim::SimOptions off_opts;
    off_opts.mask_geb = true;
    const auto on = sim::run(gimg, {}, on_opts, &on_state);
    const auto off = sim::run(gimg, {}, off_opts, &off_state);
    const auto plain = sim::run(pimg);
    checked_accesses += static_cast<int>(checks);
    const bool same = on.status == sim::RunStatus::Completed && off.status == sim::RunStatus::Completed &&
                      on.exit_value == off.exit_value && on_state.regs == off_state.regs &&
                      on_state.pc == off_state.pc && on_state.mem == off_state.mem &&
                      on.instructions == off.instructions && plain.status == sim::RunStatus::Completed &&
                      plain.exit_value == on.exit_value;
    if (!same) {
      ++divergences;
      if (first.empty()) first = fmt("seed %d", seed);
    }
  }
  Verdict v;
  v.pass = divergences == 0 && failures == 0 && checked_accesses > 0;
  v.detail = fmt("%d generated programs, %d checked accesses with GEB on, %d divergences (registers, memory, exit; "
                 "also vs plain build), %d compile failures, %.2f s",
                 kPrograms, checked_accesses, divergences, failures, seconds_since(t0));
  if (!first.empty()) v.detail += "; first: " + first;
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <corpus-dir>\n", argv[0]);
    return 2;
  }
  std::vector<harness::CorpusEntry> corpus;
  try {
    corpus = harness::load_corpus(argv[1]);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  std::vector<harness::CorpusEntry> benign;
  for (const auto& e : corpus) {
    if (e.category == harness::Category::Benign) benign.push_back(e);
  }

  harness::RunReport report;
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"guard matches reference check", oracle_equivalence},
      {"boundary exactness", boundary_exactness},
      {"security suite", [&] { return security_suite(corpus, report); }},
      {"header self-check", [&] { return header_self_check(corpus); }},
      {"header read accounting", [&] { return overhead_accounting(benign); }},
      {"locality", [&] { return locality(benign); }},
      {"size bloat", [&] { return bloat(report); }},
      {"context flag preservation", [&] { return context_switching(corpus); }},
      {"guard transparency", guard_transparency},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("[%s] %zu. %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
