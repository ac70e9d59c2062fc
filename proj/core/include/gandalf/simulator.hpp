#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gandalf/guard.hpp"
#include "gandalf/machine.hpp"
#include "gandalf/memsys.hpp"

namespace gandalf::sim {

inline constexpr std::uint64_t kDefaultMaxInstructions = 50'000'000;

enum class StepStatus { Continue, Halted, Trapped };
enum class RunStatus { Completed, Trapped, LimitExceeded };

const char* to_string(RunStatus s);

/// One guard invocation as seen by the load-store unit.
struct CheckEvent {
  Word pc = 0;
  Word effective_address = 0;
  Word object_base = 0;
  unsigned reads = 0;
  guard::CheckResult result;
};

using RetireHook = std::function<void(const MachineState&, const Instruction&, Word pc)>;
using CheckHook = std::function<void(const CheckEvent&)>;

struct SimOptions {
  std::uint64_t max_instructions = kDefaultMaxInstructions;
  /// Ignore writes to GEB so that an instrumented image runs unchecked.
  bool mask_geb = false;
  /// Text trace: one line per retired instruction and per guard check.
  std::ostream* trace = nullptr;
  RetireHook on_retire;
  CheckHook on_check;
};

struct RunOutcome {
  RunStatus status = RunStatus::Completed;
  std::optional<TrapRecord> trap;
  std::uint64_t cycles = 0;
  std::uint64_t instructions = 0;
  memsys::MemStats mem_stats;
  Word exit_value = 0;
};

/// Fetch-decode-execute engine. Every load and store passes through the
/// protection check before it reaches the memory system.
class Cpu {
 public:
  Cpu(memsys::MemSystem& memsys, const SimOptions& options)
      : memsys_(memsys), options_(options) {}

  StepStatus step(MachineState& state);

 private:
  StepStatus trap(MachineState& state, TrapKind kind, Word ea, std::string detail);
  bool checked_access(MachineState& state, Word pc, Word object_base, Word ea);
  std::string header_dump(const MachineState& state, Word object_base) const;

  memsys::MemSystem& memsys_;
  const SimOptions& options_;
};

/// Runs a prepared machine until halt, trap, or the instruction limit, then
/// drains the store buffer. Statistics are those accrued during this call.
RunOutcome run_state(MachineState& state, memsys::MemSystem& memsys, const SimOptions& options = {});

/// Loads `image` into a fresh machine and runs it under `cost`.
RunOutcome run(const Image& image, const memsys::CostConfig& cost = {},
               const SimOptions& options = {}, MachineState* final_state = nullptr);

/// Per-process context as kept by the operating system.
struct ProcessContext {
  std::string name;
  MachineState machine;
  bool saved_geb = false;
  bool saved_phwe = false;
  RunOutcome outcome;
  bool finished = false;
};

ProcessContext make_process(std::string name, const Image& image);

struct SchedulerOptions {
  std::uint64_t quantum = 1000;
  /// Switch out a process immediately after it retires MTSPR(18,1).
  bool preempt_after_phwe_set = false;
  /// Save and restore GEB/PHWE on every switch. Clearing this models a
  /// kernel that leaves the bits in the shared physical register.
  bool save_restore_flags = true;
};

/// Round-robin execution of `procs` on one core sharing `memsys`. Returns the
/// outcome of each process in input order (also stored in the contexts).
std::vector<RunOutcome> run_interleaved(std::vector<ProcessContext>& procs, memsys::MemSystem& memsys,
                                        const SchedulerOptions& sched, const SimOptions& options = {});

}  // namespace gandalf::sim
