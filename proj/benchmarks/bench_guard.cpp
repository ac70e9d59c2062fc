#include <benchmark/benchmark.h>

#include "gandalf/guard.hpp"
#include "gandalf/memsys.hpp"

using namespace gandalf;

namespace {

constexpr Word kObj = 0x80012350;

Memory with_header(Word size) {
  Memory mem;
  const auto h = guard::make_header(kObj, size);
  mem.write_word(kObj - 12, h.magic);
  mem.write_word(kObj - 8, h.base_field);
  mem.write_word(kObj - 4, h.bound_field);
  return mem;
}

void BM_CheckAllowed(benchmark::State& state) {
  const Memory mem = with_header(64);
  Word ea = kObj;
  for (auto _ : state) {
    benchmark::DoNotOptimize(guard::check_access(mem, SprFlags{true, false}, kObj, ea));
    ea = ea == kObj + 60 ? kObj : ea + 4;
  }
}
BENCHMARK(BM_CheckAllowed);

void BM_CheckBadMagic(benchmark::State& state) {
  const Memory mem;
  for (auto _ : state) benchmark::DoNotOptimize(guard::check_access(mem, SprFlags{true, false}, kObj, kObj));
}
BENCHMARK(BM_CheckBadMagic);

void BM_HeaderLookup(benchmark::State& state) {
  memsys::CostConfig c;
  c.headerregs_enabled = state.range(0) != 0;
  memsys::MemSystem ms(c);
  Memory mem = with_header(64);
  for (auto _ : state) benchmark::DoNotOptimize(ms.header_lookup(mem, kObj));
}
BENCHMARK(BM_HeaderLookup)->Arg(0)->Arg(1);

void BM_CacheRead(benchmark::State& state) {
  memsys::CostConfig c;
  c.cache.total_size = static_cast<std::uint32_t>(state.range(0));
  memsys::MemSystem ms(c);
  Memory mem;
  Word addr = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ms.read(mem, memsys::AccessKind::DataRead, 0x10000 + addr));
    addr = (addr + 68) & 0x3FFC;
  }
  state.counters["hit_rate"] =
      double(ms.stats().cache_hits) / double(ms.stats().cache_hits + ms.stats().cache_misses);
}
BENCHMARK(BM_CacheRead)->Arg(256)->Arg(4096)->Arg(16384);

}  // namespace
