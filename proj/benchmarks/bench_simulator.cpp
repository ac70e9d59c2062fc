#include <benchmark/benchmark.h>

#include <filesystem>

#include "gandalf/asm.hpp"
#include "gandalf/harness.hpp"
#include "gandalf/simulator.hpp"

using namespace gandalf;

namespace {

const harness::Images& images(const std::string& name) {
  static std::map<std::string, harness::Images> cache;
  auto it = cache.find(name);
  if (it == cache.end()) {
    const auto entry = harness::load_entry(std::filesystem::path(GANDALF_CORPUS_DIR) / "benign" / (name + ".mg"));
    it = cache.emplace(name, harness::build(entry.source)).first;
  }
  return it->second;
}

// Simulated instructions per second for one corpus program.
void run_entry(benchmark::State& state, const std::string& name, bool gandalf, memsys::CostConfig cost) {
  const auto& im = images(name);
  const Image& image = gandalf ? im.gandalf_image : im.plain_image;
  std::uint64_t insns = 0;
  std::uint64_t cycles = 0;
  for (auto _ : state) {
    const auto out = sim::run(image, cost);
    insns += out.instructions;
    cycles = out.cycles;
  }
  state.counters["insns/s"] = benchmark::Counter(double(insns), benchmark::Counter::kIsRate);
  state.counters["sim_cycles"] = double(cycles);
}

memsys::CostConfig cache_off() {
  memsys::CostConfig c;
  c.cache.enabled = false;
  return c;
}

memsys::CostConfig headerregs_on() {
  memsys::CostConfig c;
  c.headerregs_enabled = true;
  return c;
}

BENCHMARK_CAPTURE(run_entry, tight_loop_plain, "tight_loop", false, memsys::CostConfig{});
BENCHMARK_CAPTURE(run_entry, tight_loop_gandalf, "tight_loop", true, memsys::CostConfig{});
BENCHMARK_CAPTURE(run_entry, tight_loop_gandalf_nocache, "tight_loop", true, cache_off());
BENCHMARK_CAPTURE(run_entry, tight_loop_gandalf_headerregs, "tight_loop", true, headerregs_on());
BENCHMARK_CAPTURE(run_entry, bubble_sort_plain, "bubble_sort", false, memsys::CostConfig{});
BENCHMARK_CAPTURE(run_entry, bubble_sort_gandalf, "bubble_sort", true, memsys::CostConfig{});
BENCHMARK_CAPTURE(run_entry, factorial_gandalf, "factorial", true, memsys::CostConfig{});

void BM_Interleaved(benchmark::State& state) {
  const auto& a = images("tight_loop");
  const auto& b = images("bubble_sort");
  sim::SchedulerOptions so;
  so.quantum = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    std::vector<sim::ProcessContext> procs{sim::make_process("a", a.gandalf_image),
                                           sim::make_process("b", b.plain_image)};
    memsys::MemSystem ms;
    benchmark::DoNotOptimize(sim::run_interleaved(procs, ms, so));
  }
}
BENCHMARK(BM_Interleaved)->Arg(10)->Arg(1000);

}  // namespace
