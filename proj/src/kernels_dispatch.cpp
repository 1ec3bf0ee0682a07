#include <cstdlib>
#include <string_view>

#include "uplink/kernels.hpp"

namespace uplink::kernels {

#if defined(UPLINK_HAVE_AVX2)
const KernelSet& avx2_set();
#endif
#if defined(UPLINK_HAVE_NEON)
const KernelSet& neon_set();
#endif

const KernelSet* avx2() {
#if defined(UPLINK_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_set() : nullptr;
#else
  return nullptr;
#endif
}

const KernelSet* neon() {
#if defined(UPLINK_HAVE_NEON)
  return &neon_set();
#else
  return nullptr;
#endif
}

std::vector<const KernelSet*> available() {
  std::vector<const KernelSet*> sets{&scalar()};
  if (const auto* k = avx2()) {
    sets.push_back(k);
  }
  if (const auto* k = neon()) {
    sets.push_back(k);
  }
  return sets;
}

const KernelSet& active() {
  static const KernelSet& chosen = [&]() -> const KernelSet& {
    const auto sets = available();
    if (const char* forced = std::getenv("UPLINK_KERNELS")) {
      for (const auto* k : sets) {
        if (k->name == std::string_view(forced)) {
          return *k;
        }
      }
    }
    return *sets.back();
  }();
  return chosen;
}

}  // namespace uplink::kernels
