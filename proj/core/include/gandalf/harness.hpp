#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gandalf/machine.hpp"
#include "gandalf/memsys.hpp"
#include "gandalf/minig/compiler.hpp"
#include "gandalf/simulator.hpp"

namespace gandalf::harness {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Category { Exploit, Benign };

const char* to_string(Category c);

/// Expected result of one build of an entry.
struct ModeExpectation {
  enum class Status { Completed, Corrupted, Trapped };
  Status status = Status::Completed;
  /// Exit value (completed/corrupted). For corrupted runs this is the
  /// sentinel the exploit writes when it succeeds.
  std::optional<Word> exit_value;
  /// Mismatch reason for trapped runs ("above-bound", ...).
  std::optional<std::string> reason;
};

const char* to_string(ModeExpectation::Status s);

struct CorpusEntry {
  std::string name;
  Category category = Category::Benign;
  std::string description;
  std::string source;
  std::filesystem::path path;
  ModeExpectation with_gandalf;
  ModeExpectation without_gandalf;
};

/// Parses a `key = value` manifest. Keys: category, description,
/// gandalf.status, gandalf.exit, gandalf.reason, plain.status, plain.exit.
CorpusEntry parse_manifest(const std::string& text, std::string name);

/// Reads `<stem>.mg` and `<stem>.expect`.
CorpusEntry load_entry(const std::filesystem::path& source_path);

/// All entries under `dir` (recursive), sorted by name.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir);

struct NamedConfig {
  std::string name;
  memsys::CostConfig cost;
};

/// Result of checking every header right after each function prologue.
struct HeaderSweep {
  std::size_t prologues = 0;
  std::size_t blocks_checked = 0;
  std::size_t blocks_ok = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty() && blocks_checked == blocks_ok; }
};

/// Runs the instrumented build and, at every MTSPR(18,0) retirement, checks
/// each block of the active function: magic == own address,
/// base == data_start - 1, bound == data_start + size.
HeaderSweep sweep_headers(const minig::CompileOutput& instrumented, const memsys::CostConfig& cost = {},
                          std::uint64_t max_instructions = sim::kDefaultMaxInstructions);

/// Header reads predicted from the check events of a run: the sum over
/// checks of 1/2/3 by verdict. Compared against MemStats::header_reads.
struct CheckTally {
  std::uint64_t checks = 0;
  std::uint64_t allowed = 0;
  std::uint64_t predicted_reads = 0;
  std::uint64_t event_reads = 0;
};

struct ModeRun {
  sim::RunOutcome outcome;
  CheckTally tally;
};

struct ConfigRun {
  std::string config;
  ModeRun gandalf;
  ModeRun plain;
  double cycle_ratio() const;
};

struct EntryResult {
  std::string name;
  Category category = Category::Benign;
  std::string description;
  std::size_t instrumented_count = 0;
  std::size_t plain_count = 0;
  std::size_t boilerplate_count = 0;
  std::size_t variable_count = 0;
  double size_bloat = 0.0;
  HeaderSweep header_sweep;
  std::vector<ConfigRun> runs;
  std::vector<std::string> failures;
  bool passed() const { return failures.empty(); }
};

struct Images {
  minig::CompileOutput instrumented;
  minig::CompileOutput plain;
  Image gandalf_image;
  Image plain_image;
};

/// Compiles an entry in both modes. Throws minig::SyntaxError/CompileError.
Images build(const std::string& source);

ModeRun run_mode(const Image& image, const memsys::CostConfig& cost,
                 std::uint64_t max_instructions = sim::kDefaultMaxInstructions);

/// Checks one outcome against its expectation; returns a message per mismatch.
std::vector<std::string> check_expectation(const ModeExpectation& expect, const sim::RunOutcome& outcome,
                                           const std::string& mode);

struct BloatStats {
  std::vector<std::pair<std::string, double>> per_entry;
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

BloatStats measure_bloat(const std::vector<EntryResult>& results);

struct OverheadPoint {
  std::string entry;
  double cycle_ratio = 0.0;
  std::uint64_t gandalf_cycles = 0;
  std::uint64_t plain_cycles = 0;
  std::uint64_t header_reads = 0;
  std::uint64_t header_reg_hits = 0;
  double hit_rate = 0.0;
};

struct OverheadRow {
  std::string config;
  bool cache_enabled = true;
  std::uint32_t cache_size = 0;
  bool headerregs = false;
  std::vector<OverheadPoint> points;
  double mean_ratio = 0.0;
  std::uint64_t total_header_reads = 0;
};

/// Default sweep: cache off, then 256 B .. 16 KiB, each with header
/// registers off and on. Other parameters come from `base`.
std::vector<NamedConfig> default_sweep(const memsys::CostConfig& base);

std::vector<OverheadRow> measure_overheads(const std::vector<CorpusEntry>& benign,
                                           const std::vector<NamedConfig>& sweep);

struct HeaderRegBenefit {
  std::string entry;
  std::uint64_t reads_without = 0;
  std::uint64_t reads_with = 0;
  double reduction = 0.0;
};

HeaderRegBenefit header_register_benefit(const CorpusEntry& entry, const memsys::CostConfig& base);

struct RunReport {
  std::vector<NamedConfig> configs;
  std::vector<EntryResult> entries;
  BloatStats bloat;
  std::vector<OverheadRow> cache_sensitivity;
  std::vector<HeaderRegBenefit> header_register_benefit;
  std::vector<std::string> suite_errors;

  std::size_t count(Category c) const;
  std::size_t passed() const;
  bool all_passed() const { return suite_errors.empty() && passed() == entries.size(); }
  double mean_cycle_overhead() const;
  /// Fraction of entries of category `c` whose instrumented (or plain) run trapped.
  double trap_rate(Category c, bool gandalf) const;
};

struct CorpusOptions {
  bool sweep = true;
  std::uint64_t max_instructions = sim::kDefaultMaxInstructions;
};

/// Runs every entry in both modes under every config, checks expectations,
/// sweeps headers, and fills the aggregate tables.
RunReport run_corpus(const std::vector<CorpusEntry>& entries, const std::vector<NamedConfig>& configs,
                     const CorpusOptions& options = {});

/// Parameters of `cost` as a flat key/value JSON object string.
std::string cost_to_json(const memsys::CostConfig& cost);

/// One run outcome (status, trap, cycles, stats) as a JSON object string.
std::string outcome_to_json(const sim::RunOutcome& outcome);

/// Deterministic JSON rendering of the report.
std::string report_to_json(const RunReport& report);

/// Overhead table from the bench command.
std::string bench_to_json(const std::vector<NamedConfig>& configs, const std::vector<OverheadRow>& rows,
                          const std::vector<HeaderRegBenefit>& benefits);

/// One row per entry and config.
std::string report_to_csv(const RunReport& report);

}  // namespace gandalf::harness
