#include "gandalf/memory.hpp"

#include <algorithm>

namespace gandalf {

Memory::Memory(const Memory& other) {
  for (const auto& [no, page] : other.pages_) {
    pages_.emplace(no, std::make_unique<Page>(*page));
  }
}

Memory& Memory::operator=(const Memory& other) {
  if (this != &other) {
    Memory copy(other);
    *this = std::move(copy);
  }
  return *this;
}

const Memory::Page* Memory::find_page(std::uint32_t page_no) const {
  auto it = pages_.find(page_no);
  return it == pages_.end() ? nullptr : it->second.get();
}

Memory::Page& Memory::page_for_write(std::uint32_t page_no) {
  auto& slot = pages_[page_no];
  if (!slot) {
    slot = std::make_unique<Page>();
    slot->fill(0);
  }
  return *slot;
}

std::uint8_t Memory::read_byte(std::uint32_t addr) const {
  const Page* page = find_page(addr >> kPageBits);
  return page ? (*page)[addr & (kPageSize - 1)] : 0;
}

void Memory::write_byte(std::uint32_t addr, std::uint8_t value) {
  page_for_write(addr >> kPageBits)[addr & (kPageSize - 1)] = value;
}

std::uint32_t Memory::read_word(std::uint32_t addr) const {
  const std::uint32_t off = addr & (kPageSize - 1);
  if (off <= kPageSize - 4) {
    const Page* page = find_page(addr >> kPageBits);
    if (!page) return 0;
    const auto* p = page->data() + off;
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
           (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
  }
  // straddles a page (or wraps the address space)
  std::uint32_t v = 0;
  for (std::uint32_t i = 0; i < 4; ++i) v = (v << 8) | read_byte(addr + i);
  return v;
}

void Memory::write_word(std::uint32_t addr, std::uint32_t value) {
  const std::uint32_t off = addr & (kPageSize - 1);
  if (off <= kPageSize - 4) {
    auto* p = page_for_write(addr >> kPageBits).data() + off;
    p[0] = static_cast<std::uint8_t>(value >> 24);
    p[1] = static_cast<std::uint8_t>(value >> 16);
    p[2] = static_cast<std::uint8_t>(value >> 8);
    p[3] = static_cast<std::uint8_t>(value);
    return;
  }
  for (std::uint32_t i = 0; i < 4; ++i) {
    write_byte(addr + i, static_cast<std::uint8_t>(value >> (24 - 8 * i)));
  }
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> Memory::nonzero_words()
    const {
  std::vector<std::uint32_t> page_nos;
  page_nos.reserve(pages_.size());
  for (const auto& [no, page] : pages_) page_nos.push_back(no);
  std::sort(page_nos.begin(), page_nos.end());

  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for (std::uint32_t no : page_nos) {
    const std::uint32_t base = no << kPageBits;
    for (std::uint32_t off = 0; off < kPageSize; off += 4) {
      if (std::uint32_t w = read_word(base + off); w != 0) {
        out.emplace_back(base + off, w);
      }
    }
  }
  return out;
}

bool operator==(const Memory& a, const Memory& b) {
  return a.nonzero_words() == b.nonzero_words();
}

}  // namespace gandalf
