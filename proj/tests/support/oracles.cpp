#include "oracles.hpp"

namespace oracle {

CheckResult reference_check(bool geb, bool phwe, const std::function<std::uint32_t(std::uint32_t)>& load,
                      std::uint32_t object_base, std::uint32_t ea) {
  const std::uint32_t magic_address = object_base - 12;
  const std::uint32_t base_address = object_base - 8;
  const std::uint32_t bound_address = object_base - 4;
  if (geb && !phwe) {
    if (load(magic_address) == magic_address) {
      if (load(base_address) < ea) {
        if (load(bound_address) > ea) {
          return {Verdict::Allow, 3};
        } else {
          return {Verdict::AboveBound, 3};
        }
      } else {
        return {Verdict::BelowBase, 2};
      }
    } else {
      return {Verdict::BadMagic, 1};
    }
  } else if (geb && phwe) {
    return {Verdict::Allow, 0};
  } else {
    return {Verdict::Allow, 0};
  }
}

std::uint32_t RefCache::read(std::uint32_t addr) {
  if (!enabled_) {
    ++misses;
    return miss_;
  }
  const std::uint32_t block = addr / line_;
  const std::uint32_t set = block % sets_;
  auto it = tag_of_set_.find(set);
  if (it != tag_of_set_.end() && it->second == block) {
    ++hits;
    return hit_;
  }
  tag_of_set_[set] = block;
  ++misses;
  return miss_;
}

void RefCache::install(std::uint32_t addr) {
  if (enabled_) tag_of_set_[(addr / line_) % sets_] = addr / line_;
}

}  // namespace oracle
