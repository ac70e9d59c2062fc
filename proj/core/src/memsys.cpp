#include "gandalf/memsys.hpp"

#include <bit>
#include <fstream>
#include <sstream>

namespace gandalf::memsys {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::uint32_t parse_u32(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(value, &used, 0);
    if (used != value.size() || v > 0xFFFFFFFFul) throw std::invalid_argument(value);
    return static_cast<std::uint32_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("bad value '" + value + "' for " + key);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "on" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "off" || value == "no") return false;
  throw ConfigError("bad boolean '" + value + "' for " + key);
}

}  // namespace

void CacheConfig::validate() const {
  if (!std::has_single_bit(total_size) || !std::has_single_bit(line_size)) {
    throw ConfigError("cache size and line size must be powers of two");
  }
  if (line_size < 4) throw ConfigError("cache line must be at least 4 bytes");
  if (total_size < line_size) throw ConfigError("cache size must be at least one line");
}

void CostConfig::validate() const {
  cache.validate();
  if (storebuf_drain_per_cycle == 0) throw ConfigError("store buffer drain rate must be positive");
}

void CostConfig::set(const std::string& key, const std::string& value) {
  if (key == "cache.size") cache.total_size = parse_u32(key, value);
  else if (key == "cache.line") cache.line_size = parse_u32(key, value);
  else if (key == "cache.hit") cache.hit_cycles = parse_u32(key, value);
  else if (key == "cache.miss") cache.miss_cycles = parse_u32(key, value);
  else if (key == "cache.enabled") cache.enabled = parse_bool(key, value);
  else if (key == "storebuf.capacity") storebuf_capacity = parse_u32(key, value);
  else if (key == "storebuf.drain") storebuf_drain_per_cycle = parse_u32(key, value);
  else if (key == "headerregs.enabled") headerregs_enabled = parse_bool(key, value);
  else if (key == "base.cycles") base_cycles = parse_u32(key, value);
  else throw ConfigError("unknown cost config key '" + key + "'");
}

CostConfig CostConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open cost config " + path);
  CostConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

MemStats& MemStats::operator+=(const MemStats& o) {
  data_reads += o.data_reads;
  data_writes += o.data_writes;
  header_reads += o.header_reads;
  cache_hits += o.cache_hits;
  cache_misses += o.cache_misses;
  header_reg_hits += o.header_reg_hits;
  store_forwards += o.store_forwards;
  storebuf_stall_cycles += o.storebuf_stall_cycles;
  total_mem_cycles += o.total_mem_cycles;
  return *this;
}

MemStats operator-(MemStats a, const MemStats& b) {
  a.data_reads -= b.data_reads;
  a.data_writes -= b.data_writes;
  a.header_reads -= b.header_reads;
  a.cache_hits -= b.cache_hits;
  a.cache_misses -= b.cache_misses;
  a.header_reg_hits -= b.header_reg_hits;
  a.store_forwards -= b.store_forwards;
  a.storebuf_stall_cycles -= b.storebuf_stall_cycles;
  a.total_mem_cycles -= b.total_mem_cycles;
  return a;
}

void HeaderRegs::snoop_store(Word addr) {
  if (!cached_object_base) return;
  const Word lo = *cached_object_base - guard::kMagicOffset;
  // word-aligned stores only reach lo, lo+4, lo+8
  if (addr - lo < guard::kHeaderBytes) invalidate();
}

std::optional<Word> StoreBuffer::forward(Word addr) const {
  for (auto it = pending_.rbegin(); it != pending_.rend(); ++it) {
    if (it->addr == addr) return it->value;
  }
  return std::nullopt;
}

Word StoreBuffer::drain_one(Memory& mem) {
  const Entry e = pending_.front();
  pending_.pop_front();
  mem.write_word(e.addr, e.value);
  return e.addr;
}

MemSystem::MemSystem(CostConfig config)
    : config_(config), buffer_(config.storebuf_capacity) {
  config_.validate();
  tags_.assign(config_.cache.total_size / config_.cache.line_size, std::nullopt);
  header_regs_.enabled = config_.headerregs_enabled;
}

bool MemSystem::cache_lookup(Word addr, bool allocate) {
  if (!config_.cache.enabled) return false;
  const Word line = addr / config_.cache.line_size;
  const std::size_t index = line % tags_.size();
  if (tags_[index] == line) return true;
  if (allocate) tags_[index] = line;
  return false;
}

MemSystem::ReadResult MemSystem::read(Memory& mem, AccessKind kind, Word addr) {
  if (kind == AccessKind::HeaderRead) ++stats_.header_reads;
  else ++stats_.data_reads;

  std::uint32_t cycles;
  Word value;
  if (auto fwd = buffer_.forward(addr)) {
    ++stats_.store_forwards;
    value = *fwd;
    cycles = config_.cache.hit_cycles;
  } else {
    value = mem.read_word(addr);
    if (cache_lookup(addr, true)) {
      ++stats_.cache_hits;
      cycles = config_.cache.hit_cycles;
    } else {
      ++stats_.cache_misses;
      cycles = config_.cache.miss_cycles;
    }
  }
  charge(cycles);
  return {value, cycles};
}

void MemSystem::retire_one(Memory& mem) {
  const Word addr = buffer_.drain_one(mem);
  cache_lookup(addr, true);
}

std::uint32_t MemSystem::write(Memory& mem, Word addr, Word value) {
  ++stats_.data_writes;
  header_regs_.snoop_store(addr);
  std::uint32_t stall = 0;
  if (config_.storebuf_capacity == 0) {
    // no buffer: the write goes straight through the cache
    mem.write_word(addr, value);
    stall = cache_lookup(addr, true) ? config_.cache.hit_cycles : config_.cache.miss_cycles;
  } else {
    if (buffer_.full()) {
      // wait one cycle for a drain slot
      stall = 1;
      stats_.storebuf_stall_cycles += stall;
      retire_one(mem);
    }
    buffer_.push(addr, value);
  }
  charge(stall);
  return stall;
}

std::uint32_t MemSystem::mem_access(Memory& mem, AccessKind kind, Word addr) {
  if (kind == AccessKind::DataWrite) return write(mem, addr, peek(mem, addr));
  return read(mem, kind, addr).cycles;
}

HeaderLookup MemSystem::header_lookup(Memory& mem, Word object_base) {
  if (header_regs_.enabled && header_regs_.cached_object_base == object_base) {
    ++stats_.header_reg_hits;
    return {header_regs_.header, 0};
  }
  const auto addrs = guard::header_addresses_unchecked(object_base);
  guard::ProtectionHeader h;
  h.magic = read(mem, AccessKind::HeaderRead, addrs.magic_addr).value;
  h.base_field = read(mem, AccessKind::HeaderRead, addrs.base_addr).value;
  h.bound_field = read(mem, AccessKind::HeaderRead, addrs.bound_addr).value;
  if (header_regs_.enabled) {
    header_regs_.cached_object_base = object_base;
    header_regs_.header = h;
  }
  return {h, 3};
}

void MemSystem::tick(Memory& mem, std::uint64_t cycles) {
  std::uint64_t budget = cycles * config_.storebuf_drain_per_cycle;
  while (budget-- > 0 && !buffer_.empty()) retire_one(mem);
}

void MemSystem::flush(Memory& mem) {
  while (!buffer_.empty()) retire_one(mem);
}

void MemSystem::switch_out(Memory& mem) {
  flush(mem);
  header_regs_.invalidate();
}

Word MemSystem::peek(const Memory& mem, Word addr) const {
  if (auto fwd = buffer_.forward(addr)) return *fwd;
  return mem.read_word(addr);
}

Word ChargedHeaderView::read_word(Word addr) const {
  const auto r = sys_.read(mem_, AccessKind::HeaderRead, addr);
  ++reads_;
  cycles_ += r.cycles;
  return r.value;
}

Word RegisterHeaderView::read_word(Word addr) const {
  if (addr == addrs_.magic_addr) return header_.magic;
  if (addr == addrs_.base_addr) return header_.base_field;
  if (addr == addrs_.bound_addr) return header_.bound_field;
  return 0;
}

}  // namespace gandalf::memsys
