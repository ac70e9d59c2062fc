#include "gandalf/simulator.hpp"

#include <cstdio>

namespace gandalf::sim {

namespace {

std::string hex(Word w) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", w);
  return buf;
}

Word alu(Opcode op, Word a, Word b) {
  switch (op) {
    case Opcode::Add: case Opcode::AddI: return a + b;
    case Opcode::Sub: case Opcode::SubI: return a - b;
    case Opcode::And: case Opcode::AndI: return a & b;
    case Opcode::Or: case Opcode::OrI: return a | b;
    case Opcode::Shl: case Opcode::ShlI: return a << (b & 31);
    case Opcode::Mul: case Opcode::MulI: return a * b;
    default: return 0;
  }
}

}  // namespace

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::Trapped: return "trapped";
    case RunStatus::LimitExceeded: return "limit-exceeded";
  }
  return "?";
}

StepStatus Cpu::trap(MachineState& state, TrapKind kind, Word ea, std::string detail) {
  TrapRecord rec;
  rec.kind = kind;
  rec.pc = state.pc;
  rec.effective_address = ea;
  rec.detail = std::move(detail);
  state.trap = std::move(rec);
  return StepStatus::Trapped;
}

std::string Cpu::header_dump(const MachineState& state, Word object_base) const {
  const auto a = guard::header_addresses_unchecked(object_base);
  auto slot = [&](const char* name, Word addr) {
    return std::string(name) + "[" + hex(addr) + "]=" + hex(memsys_.peek(state.mem, addr));
  };
  return slot("magic", a.magic_addr) + " " + slot("base", a.base_addr) + " " + slot("bound", a.bound_addr);
}

// Returns false (with state.trap set) when the access must not proceed.
bool Cpu::checked_access(MachineState& state, Word pc, Word object_base, Word ea) {
  if (ea % 4 != 0) {
    trap(state, TrapKind::AlignmentError, ea, "unaligned effective address " + hex(ea));
    return false;
  }
  if (!state.spr.geb || state.spr.phwe) return true;

  if (object_base % 4 != 0) {
    trap(state, TrapKind::AlignmentError, ea, "unaligned object base " + hex(object_base));
    state.trap->object_base = object_base;
    return false;
  }

  CheckEvent ev;
  ev.pc = pc;
  ev.effective_address = ea;
  ev.object_base = object_base;
  if (memsys_.config().headerregs_enabled) {
    const auto lookup = memsys_.header_lookup(state.mem, object_base);
    const memsys::RegisterHeaderView view(object_base, lookup.header);
    ev.result = guard::check_access(view, state.spr, object_base, ea);
    ev.reads = lookup.reads_issued;
  } else {
    const memsys::ChargedHeaderView view(memsys_, state.mem);
    ev.result = guard::check_access(view, state.spr, object_base, ea);
    ev.reads = view.reads();
  }

  if (options_.trace) {
    *options_.trace << "check pc=" << hex(pc) << " ea=" << hex(ea) << " base=" << hex(object_base)
                    << " reads=" << ev.reads << " verdict=" << guard::to_string(ev.result.verdict) << '\n';
  }
  if (options_.on_check) options_.on_check(ev);

  if (!ev.result.allowed()) {
    const char* reason = guard::to_string(ev.result.verdict);
    trap(state, TrapKind::Mismatch, ea,
         std::string(reason) + " at ea=" + hex(ea) + " object_base=" + hex(object_base) + " " +
             header_dump(state, object_base));
    state.trap->reason = reason;
    state.trap->object_base = object_base;
    return false;
  }
  return true;
}

StepStatus Cpu::step(MachineState& state) {
  if (state.trap) return StepStatus::Trapped;

  const Word pc = state.pc;
  const std::uint64_t mem_before = memsys_.stats().total_mem_cycles;
  const std::uint32_t base_cycles = memsys_.config().base_cycles;
  auto retire = [&](Word next_pc) {
    const std::uint64_t cycles = base_cycles + (memsys_.stats().total_mem_cycles - mem_before);
    state.cycles += cycles;
    ++state.instructions;
    state.pc = next_pc;
    memsys_.tick(state.mem, cycles);
  };

  if (pc % 4 != 0) {
    retire(pc);
    return trap(state, TrapKind::AlignmentError, pc, "unaligned pc " + hex(pc));
  }

  Instruction insn;
  try {
    insn = decode(memsys_.peek(state.mem, pc));
  } catch (const DecodeError& e) {
    retire(pc);
    return trap(state, TrapKind::DecodeError, pc, e.what());
  }

  if (options_.trace) *options_.trace << "retire pc=" << hex(pc) << " " << disassemble(insn) << '\n';

  Word next = pc + 4;
  StepStatus status = StepStatus::Continue;
  switch (insn.op) {
    case Opcode::Add: case Opcode::Sub: case Opcode::And:
    case Opcode::Or: case Opcode::Shl: case Opcode::Mul:
      state.set_reg(insn.rd, alu(insn.op, state.reg(insn.ra), state.reg(insn.rb)));
      break;
    case Opcode::AddI: case Opcode::SubI: case Opcode::AndI:
    case Opcode::OrI: case Opcode::ShlI: case Opcode::MulI:
      state.set_reg(insn.rd, alu(insn.op, state.reg(insn.ra), static_cast<Word>(insn.imm)));
      break;
    case Opcode::Load: case Opcode::LoadX: {
      const Word base = state.reg(insn.ra);
      const Word ea = insn.op == Opcode::Load ? effective_address(base, static_cast<std::int16_t>(insn.imm))
                                               : base + state.reg(insn.rb);
      if (!checked_access(state, pc, base, ea)) {
        retire(pc);
        return StepStatus::Trapped;
      }
      state.set_reg(insn.rd, memsys_.read(state.mem, memsys::AccessKind::DataRead, ea).value);
      break;
    }
    case Opcode::Store: case Opcode::StoreX: {
      const Word base = state.reg(insn.ra);
      const Word ea = insn.op == Opcode::Store ? effective_address(base, static_cast<std::int16_t>(insn.imm))
                                                : base + state.reg(insn.rb);
      const Word value = state.reg(insn.op == Opcode::Store ? insn.rb : insn.rd);
      if (!checked_access(state, pc, base, ea)) {
        retire(pc);
        return StepStatus::Trapped;
      }
      memsys_.write(state.mem, ea, value);
      break;
    }
    case Opcode::MtSpr:
      if (insn.spr == kSprGeb) {
        if (!options_.mask_geb) state.spr.geb = insn.imm != 0;
      } else {
        state.spr.phwe = insn.imm != 0;
      }
      break;
    case Opcode::MfSpr:
      state.set_reg(insn.rd, (insn.spr == kSprGeb ? state.spr.geb : state.spr.phwe) ? 1 : 0);
      break;
    case Opcode::Beq: case Opcode::Bne: case Opcode::Blt: {
      const Word a = state.reg(insn.ra);
      const Word b = state.reg(insn.rb);
      bool taken = false;
      if (insn.op == Opcode::Beq) taken = a == b;
      else if (insn.op == Opcode::Bne) taken = a != b;
      else taken = static_cast<std::int32_t>(a) < static_cast<std::int32_t>(b);
      if (taken) next = pc + static_cast<Word>(insn.imm) * 4;
      break;
    }
    case Opcode::Jal:
      state.set_reg(kRegLink, pc + 4);
      next = static_cast<Word>(insn.imm) * 4;
      break;
    case Opcode::Jalr:
      next = state.reg(insn.ra);
      break;
    case Opcode::Halt:
      next = pc;
      status = StepStatus::Halted;
      break;
  }

  retire(next);
  if (options_.on_retire) options_.on_retire(state, insn, pc);
  return status;
}

RunOutcome run_state(MachineState& state, memsys::MemSystem& memsys, const SimOptions& options) {
  const memsys::MemStats stats_before = memsys.stats();
  const std::uint64_t cycles_before = state.cycles;
  const std::uint64_t insns_before = state.instructions;

  Cpu cpu(memsys, options);
  RunOutcome out;
  out.status = RunStatus::LimitExceeded;
  while (state.instructions - insns_before < options.max_instructions) {
    const StepStatus s = cpu.step(state);
    if (s == StepStatus::Halted) {
      out.status = RunStatus::Completed;
      break;
    }
    if (s == StepStatus::Trapped) {
      out.status = RunStatus::Trapped;
      break;
    }
  }
  memsys.flush(state.mem);

  out.trap = state.trap;
  out.cycles = state.cycles - cycles_before;
  out.instructions = state.instructions - insns_before;
  out.mem_stats = memsys.stats() - stats_before;
  out.exit_value = state.reg(kRegRet);
  return out;
}

RunOutcome run(const Image& image, const memsys::CostConfig& cost, const SimOptions& options,
               MachineState* final_state) {
  MachineState state = load_image(image);
  memsys::MemSystem memsys(cost);
  RunOutcome out = run_state(state, memsys, options);
  if (final_state) *final_state = std::move(state);
  return out;
}

ProcessContext make_process(std::string name, const Image& image) {
  ProcessContext p;
  p.name = std::move(name);
  p.machine = load_image(image);
  return p;
}

std::vector<RunOutcome> run_interleaved(std::vector<ProcessContext>& procs, memsys::MemSystem& memsys,
                                        const SchedulerOptions& sched, const SimOptions& options) {
  // The physical SPR shared by every process on this core.
  SprFlags live;
  std::vector<memsys::MemStats> stats(procs.size());
  Cpu cpu(memsys, options);

  std::size_t remaining = 0;
  for (auto& p : procs) {
    if (!p.finished) ++remaining;
  }

  while (remaining > 0) {
    for (std::size_t i = 0; i < procs.size(); ++i) {
      ProcessContext& p = procs[i];
      if (p.finished) continue;

      // switch in
      p.machine.spr = sched.save_restore_flags ? SprFlags{p.saved_geb, p.saved_phwe} : live;
      const memsys::MemStats before = memsys.stats();

      std::optional<RunStatus> done;
      for (std::uint64_t n = 0; n < sched.quantum; ++n) {
        if (p.machine.instructions >= options.max_instructions) {
          done = RunStatus::LimitExceeded;
          break;
        }
        const bool phwe_before = p.machine.spr.phwe;
        const StepStatus s = cpu.step(p.machine);
        if (s == StepStatus::Halted) {
          done = RunStatus::Completed;
          break;
        }
        if (s == StepStatus::Trapped) {
          done = RunStatus::Trapped;
          break;
        }
        if (sched.preempt_after_phwe_set && !phwe_before && p.machine.spr.phwe) break;
      }

      // switch out
      live = p.machine.spr;
      if (sched.save_restore_flags) {
        p.saved_geb = p.machine.spr.geb;
        p.saved_phwe = p.machine.spr.phwe;
      }
      memsys.switch_out(p.machine.mem);
      stats[i] += memsys.stats() - before;

      if (done) {
        p.finished = true;
        --remaining;
        p.outcome.status = *done;
        p.outcome.trap = p.machine.trap;
        p.outcome.cycles = p.machine.cycles;
        p.outcome.instructions = p.machine.instructions;
        p.outcome.mem_stats = stats[i];
        p.outcome.exit_value = p.machine.reg(kRegRet);
      }
    }
  }

  std::vector<RunOutcome> out;
  out.reserve(procs.size());
  for (const auto& p : procs) out.push_back(p.outcome);
  return out;
}

}  // namespace gandalf::sim
