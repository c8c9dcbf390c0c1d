#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "pwap/kernels.hpp"

namespace pwap::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("PWAP_SIMD")) {
    if (std::string(env) == "scalar") return Isa::scalar;
  }
  return available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<int>& selected() {
  static std::atomic<int> isa{static_cast<int>(detect())};
  return isa;
}

}  // namespace

bool available(Isa isa) {
  if (isa == Isa::scalar) return true;
  return detail::avx2_table() != nullptr && cpu_has_avx2();
}

const KernelTable& table(Isa isa) {
  if (isa == Isa::avx2) {
    if (!available(Isa::avx2)) throw std::runtime_error("AVX2 kernels not available on this CPU");
    return *detail::avx2_table();
  }
  return detail::scalar_table();
}

Isa active_isa() { return static_cast<Isa>(selected().load(std::memory_order_relaxed)); }

const KernelTable& active() {
  static const KernelTable* const avx2 = available(Isa::avx2) ? detail::avx2_table() : nullptr;
  return active_isa() == Isa::avx2 ? *avx2 : detail::scalar_table();
}

void set_active_isa(Isa isa) {
  if (!available(isa)) throw std::runtime_error("requested kernel ISA is not available");
  selected().store(static_cast<int>(isa), std::memory_order_relaxed);
}

std::string_view name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace pwap::kernels
