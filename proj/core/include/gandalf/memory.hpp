#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

namespace gandalf {

/// Read-only word-granular view of an address space. The guard consumes
/// memory exclusively through this interface so that the simulator can
/// interpose cost accounting and header-register lookups.
class MemoryView {
 public:
  virtual ~MemoryView() = default;
  virtual std::uint32_t read_word(std::uint32_t addr) const = 0;
};

/// Sparse, byte-addressed, default-zero memory. Words are big-endian.
class Memory : public MemoryView {
 public:
  static constexpr std::uint32_t kPageBits = 12;
  static constexpr std::uint32_t kPageSize = 1u << kPageBits;

  Memory() = default;
  Memory(const Memory& other);
  Memory& operator=(const Memory& other);
  Memory(Memory&&) noexcept = default;
  Memory& operator=(Memory&&) noexcept = default;

  std::uint8_t read_byte(std::uint32_t addr) const;
  void write_byte(std::uint32_t addr, std::uint8_t value);

  std::uint32_t read_word(std::uint32_t addr) const override;
  void write_word(std::uint32_t addr, std::uint32_t value);

  /// Number of pages touched by writes.
  std::size_t mapped_pages() const { return pages_.size(); }

  /// Nonzero words in address order; used for state comparison in tests.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> nonzero_words() const;

  friend bool operator==(const Memory& a, const Memory& b);

 private:
  using Page = std::array<std::uint8_t, kPageSize>;

  const Page* find_page(std::uint32_t page_no) const;
  Page& page_for_write(std::uint32_t page_no);

  std::unordered_map<std::uint32_t, std::unique_ptr<Page>> pages_;
};

}  // namespace gandalf
