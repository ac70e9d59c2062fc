#pragma once

#include <cstdint>
#include <stdexcept>

#include "gandalf/machine.hpp"
#include "gandalf/memory.hpp"

namespace gandalf::guard {

/// Byte distance from an object's first data word back to each header word.
inline constexpr Word kMagicOffset = 12;
inline constexpr Word kBaseOffset = 8;
inline constexpr Word kBoundOffset = 4;
inline constexpr Word kHeaderBytes = 12;

class AlignmentError : public std::runtime_error {
 public:
  explicit AlignmentError(const std::string& what) : std::runtime_error(what) {}
};

/// The three-word metadata block stored immediately below an object.
struct ProtectionHeader {
  Word magic = 0;
  Word base_field = 0;
  Word bound_field = 0;

  friend bool operator==(const ProtectionHeader&, const ProtectionHeader&) = default;
};

struct HeaderAddresses {
  Word magic_addr = 0;
  Word base_addr = 0;
  Word bound_addr = 0;

  friend bool operator==(const HeaderAddresses&, const HeaderAddresses&) = default;
};

/// Throws AlignmentError if `object_base` is not word aligned.
HeaderAddresses derive_header_addresses(Word object_base);

/// Same layout without the alignment precondition (wrapping arithmetic). The
/// load-store unit uses this after it has validated alignment itself.
constexpr HeaderAddresses header_addresses_unchecked(Word object_base) {
  return {object_base - kMagicOffset, object_base - kBaseOffset, object_base - kBoundOffset};
}

/// Values the compiler stores so that the strict comparisons admit exactly
/// the words of [data_start, data_start + size).
ProtectionHeader make_header(Word data_start, Word size_bytes);

enum class Verdict { Allow, BadMagic, BelowBase, AboveBound };

const char* to_string(Verdict v);

struct CheckResult {
  Verdict verdict = Verdict::Allow;
  Word effective_address = 0;
  /// False when the flags bypassed the check entirely (no header reads).
  bool checked = false;

  bool allowed() const { return verdict == Verdict::Allow; }
  friend bool operator==(const CheckResult&, const CheckResult&) = default;
};

/// Hardware protection check for one load or store.
///
/// With GEB clear, or with GEB and PHWE both set, the access is allowed
/// without touching memory. Otherwise the magic word is fetched and compared
/// to its own address, then the base word (must be strictly below the
/// effective address), then the bound word (must be strictly above it). Reads
/// are issued lazily in that order and stop at the first failure.
CheckResult check_access(const MemoryView& mem, SprFlags spr, Word object_base,
                         Word effective_address);

/// Header words fetched by a check: 1 when the magic test fails, 2 when the
/// base test fails, 3 otherwise. Zero for bypassed checks.
unsigned header_read_count(const CheckResult& result);

}  // namespace gandalf::guard
