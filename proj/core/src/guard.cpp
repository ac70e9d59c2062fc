#include "gandalf/guard.hpp"

#include <cstdio>

namespace gandalf::guard {

HeaderAddresses derive_header_addresses(Word object_base) {
  if (object_base % 4 != 0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "object base 0x%08X is not word aligned", object_base);
    throw AlignmentError(buf);
  }
  return header_addresses_unchecked(object_base);
}

ProtectionHeader make_header(Word data_start, Word size_bytes) {
  const HeaderAddresses addrs = header_addresses_unchecked(data_start);
  return {addrs.magic_addr, data_start - 1, data_start + size_bytes};
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Allow: return "allow";
    case Verdict::BadMagic: return "bad-magic";
    case Verdict::BelowBase: return "below-base";
    case Verdict::AboveBound: return "above-bound";
  }
  return "?";
}

CheckResult check_access(const MemoryView& mem, SprFlags spr, Word object_base,
                         Word effective_address) {
  if (!spr.geb || spr.phwe) {
    return {Verdict::Allow, effective_address, false};
  }
  const HeaderAddresses addrs = header_addresses_unchecked(object_base);
  if (mem.read_word(addrs.magic_addr) != addrs.magic_addr) {
    return {Verdict::BadMagic, effective_address, true};
  }
  if (!(mem.read_word(addrs.base_addr) < effective_address)) {
    return {Verdict::BelowBase, effective_address, true};
  }
  if (!(mem.read_word(addrs.bound_addr) > effective_address)) {
    return {Verdict::AboveBound, effective_address, true};
  }
  return {Verdict::Allow, effective_address, true};
}

unsigned header_read_count(const CheckResult& result) {
  if (!result.checked) return 0;
  switch (result.verdict) {
    case Verdict::BadMagic: return 1;
    case Verdict::BelowBase: return 2;
    case Verdict::AboveBound:
    case Verdict::Allow: return 3;
  }
  return 3;
}

}  // namespace gandalf::guard
