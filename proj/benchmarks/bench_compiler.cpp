#include <benchmark/benchmark.h>

#include <filesystem>

#include "gandalf/asm.hpp"
#include "gandalf/harness.hpp"
#include "gandalf/minig/compiler.hpp"
#include "gandalf/minig/parser.hpp"

using namespace gandalf;

namespace {

std::string long_body() {
  return harness::load_entry(std::filesystem::path(GANDALF_CORPUS_DIR) / "benign" / "long_body.mg").source;
}

void BM_Parse(benchmark::State& state) {
  const std::string src = long_body();
  for (auto _ : state) benchmark::DoNotOptimize(minig::parse(src));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * src.size()));
}
BENCHMARK(BM_Parse);

void BM_CompileAndAssemble(benchmark::State& state) {
  const std::string src = long_body();
  const bool gandalf = state.range(0) != 0;
  for (auto _ : state) {
    const auto out = minig::compile_source(src, gandalf);
    benchmark::DoNotOptimize(assembly::assemble(out.program));
  }
}
BENCHMARK(BM_CompileAndAssemble)->Arg(0)->Arg(1);

void BM_CorpusRun(benchmark::State& state) {
  const auto entries = harness::load_corpus(GANDALF_CORPUS_DIR);
  for (auto _ : state) {
    benchmark::DoNotOptimize(harness::run_corpus(entries, {{"default", {}}}, {.sweep = false}));
  }
}
BENCHMARK(BM_CorpusRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
