#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gandalf/guard.hpp"
#include "gandalf/machine.hpp"
#include "gandalf/memory.hpp"

namespace gandalf::memsys {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Direct-mapped L1 parameters.
struct CacheConfig {
  std::uint32_t total_size = 4096;
  std::uint32_t line_size = 16;
  std::uint32_t hit_cycles = 1;
  std::uint32_t miss_cycles = 10;
  bool enabled = true;

  /// Throws ConfigError unless sizes are powers of two, line_size >= 4 and
  /// total_size >= line_size.
  void validate() const;
};

/// Full cost model. Every RunReport embeds one of these.
struct CostConfig {
  CacheConfig cache;
  std::uint32_t storebuf_capacity = 8;
  /// Entries retired from the store buffer per elapsed cycle.
  std::uint32_t storebuf_drain_per_cycle = 1;
  bool headerregs_enabled = false;
  /// Cycles charged for every retired instruction before memory costs.
  std::uint32_t base_cycles = 1;

  void validate() const;
  /// Applies one `key = value` setting (cache.size, cache.line, cache.hit,
  /// cache.miss, cache.enabled, storebuf.capacity, storebuf.drain,
  /// headerregs.enabled, base.cycles). Throws ConfigError on unknown keys.
  void set(const std::string& key, const std::string& value);
  /// Reads a key-value text file; '#' starts a comment.
  static CostConfig from_file(const std::string& path);
};

enum class AccessKind { DataRead, DataWrite, HeaderRead };

struct MemStats {
  std::uint64_t data_reads = 0;
  std::uint64_t data_writes = 0;
  std::uint64_t header_reads = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  std::uint64_t header_reg_hits = 0;
  std::uint64_t store_forwards = 0;
  std::uint64_t storebuf_stall_cycles = 0;
  std::uint64_t total_mem_cycles = 0;

  MemStats& operator+=(const MemStats& o);
  friend MemStats operator-(MemStats a, const MemStats& b);
  friend bool operator==(const MemStats&, const MemStats&) = default;
};

/// Single-entry header register set (one header: magic, base, bound).
struct HeaderRegs {
  std::optional<Word> cached_object_base;
  guard::ProtectionHeader header;
  bool enabled = false;

  void invalidate() { cached_object_base.reset(); }
  /// Drops the entry if `addr` falls on one of the cached header words.
  void snoop_store(Word addr);
};

/// Bounded FIFO of pending writes.
class StoreBuffer {
 public:
  explicit StoreBuffer(std::uint32_t capacity = 8) : capacity_(capacity) {}

  std::uint32_t capacity() const { return capacity_; }
  std::size_t size() const { return pending_.size(); }
  bool full() const { return pending_.size() >= capacity_; }
  bool empty() const { return pending_.empty(); }

  void push(Word addr, Word value) { pending_.push_back({addr, value}); }
  /// Youngest pending value for `addr`, if any.
  std::optional<Word> forward(Word addr) const;
  /// Writes the oldest entry to memory and returns its address.
  Word drain_one(Memory& mem);

 private:
  struct Entry {
    Word addr;
    Word value;
  };
  std::uint32_t capacity_;
  std::deque<Entry> pending_;
};

struct HeaderLookup {
  guard::ProtectionHeader header;
  unsigned reads_issued = 0;
};

/// Cycle-cost model of the memory hierarchy. Owns timing state only; the
/// architectural contents live in the Memory passed to each call. Stores are
/// held in the store buffer until drained, and reads consult the buffer first,
/// so the sequential view of memory is always `peek()`.
class MemSystem {
 public:
  explicit MemSystem(CostConfig config = {});

  const CostConfig& config() const { return config_; }
  const MemStats& stats() const { return stats_; }
  const HeaderRegs& header_regs() const { return header_regs_; }

  struct ReadResult {
    Word value;
    std::uint32_t cycles;
  };

  /// Data or header read. Cycles: hit_cycles on forward or cache hit,
  /// miss_cycles on a miss or with the cache disabled.
  ReadResult read(Memory& mem, AccessKind kind, Word addr);
  /// Enqueues a write. Zero stall while the buffer has room.
  std::uint32_t write(Memory& mem, Word addr, Word value);

  /// Cost-only form of read/write used by trace replays; returns cycles.
  std::uint32_t mem_access(Memory& mem, AccessKind kind, Word addr);

  /// Header fetch through the on-chip registers: 0 reads when the registers
  /// already hold `object_base`, otherwise 3 reads and a refill. With the
  /// registers disabled this always issues 3 reads.
  HeaderLookup header_lookup(Memory& mem, Word object_base);

  /// Advances time, draining the store buffer at the configured rate.
  void tick(Memory& mem, std::uint64_t cycles);
  /// Drains every pending store to memory (halt, trap, context switch).
  void flush(Memory& mem);
  /// Flushes and drops header registers; called on context switch.
  void switch_out(Memory& mem);

  /// Sequential view of a word without charging any cost.
  Word peek(const Memory& mem, Word addr) const;

  std::size_t pending_stores() const { return buffer_.size(); }

 private:
  bool cache_lookup(Word addr, bool allocate);
  void charge(std::uint32_t cycles) { stats_.total_mem_cycles += cycles; }
  void retire_one(Memory& mem);

  CostConfig config_;
  std::vector<std::optional<Word>> tags_;
  StoreBuffer buffer_;
  HeaderRegs header_regs_;
  MemStats stats_;
};

/// Adapts a MemSystem + Memory to the guard's MemoryView, charging every
/// header fetch as a HeaderRead and counting it.
class ChargedHeaderView : public MemoryView {
 public:
  ChargedHeaderView(MemSystem& sys, Memory& mem) : sys_(sys), mem_(mem) {}
  Word read_word(Word addr) const override;
  unsigned reads() const { return reads_; }
  std::uint64_t cycles() const { return cycles_; }

 private:
  MemSystem& sys_;
  Memory& mem_;
  mutable unsigned reads_ = 0;
  mutable std::uint64_t cycles_ = 0;
};

/// Serves the three header words of one object from an already-fetched
/// header, falling back to zero elsewhere.
class RegisterHeaderView : public MemoryView {
 public:
  RegisterHeaderView(Word object_base, const guard::ProtectionHeader& header)
      : addrs_(guard::header_addresses_unchecked(object_base)), header_(header) {}
  Word read_word(Word addr) const override;

 private:
  guard::HeaderAddresses addrs_;
  guard::ProtectionHeader header_;
};

}  // namespace gandalf::memsys
