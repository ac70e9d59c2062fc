#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>

// Independent reference models used by the unit and acceptance tests. None of
// these include library headers, so they cannot share bugs with them.
namespace oracle {

enum class Verdict { Allow, BadMagic, BelowBase, AboveBound };

struct CheckResult {
  Verdict verdict;
  unsigned reads;  // header words fetched
};

// Nested-if hardware check, written as the pseudocode reads:
//   if GEB && !PHWE
//     if [Magic] == Magic
//       if Base < EA
//         if Bound > EA -> ok
//         else mismatch
//       else mismatch
//     else mismatch
//   else if GEB && PHWE -> populate header, no mismatch
//   else -> normal access
CheckResult reference_check(bool geb, bool phwe, const std::function<std::uint32_t(std::uint32_t)>& load,
                      std::uint32_t object_base, std::uint32_t ea);

// Direct-mapped cache with per-set tags, counted in cycles.
class RefCache {
 public:
  RefCache(std::uint32_t size, std::uint32_t line, std::uint32_t hit, std::uint32_t miss, bool enabled)
      : sets_(size / line), line_(line), hit_(hit), miss_(miss), enabled_(enabled) {}

  // Returns the cycle cost of a read and installs the line.
  std::uint32_t read(std::uint32_t addr);
  // Installs a line without cost (a drained write).
  void install(std::uint32_t addr);

  std::uint64_t hits = 0;
  std::uint64_t misses = 0;

 private:
  std::uint32_t sets_;
  std::uint32_t line_;
  std::uint32_t hit_;
  std::uint32_t miss_;
  bool enabled_;
  std::map<std::uint32_t, std::uint32_t> tag_of_set_;
};

}  // namespace oracle
