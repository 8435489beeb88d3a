#include <cstdlib>
#include <string>

#include "geodcd/kernels.hpp"

namespace geodcd::kernels {

#ifdef GEODCD_HAVE_AVX2
const KernelTable* avx2_table_impl();
#endif

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable* avx2_table() {
#ifdef GEODCD_HAVE_AVX2
  return avx2_table_impl();
#else
  return nullptr;
#endif
}

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table_for(Isa isa) {
  if (isa == Isa::avx2 && cpu_supports(Isa::avx2)) {
    if (const KernelTable* t = avx2_table()) return *t;
  }
  return scalar_table();
}

namespace {

const KernelTable& detect() {
  if (const char* env = std::getenv("GEODCD_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return scalar_table();
    if (want == "avx2") return table_for(Isa::avx2);
  }
  return table_for(Isa::avx2);
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = detect();
  return table;
}

}  // namespace geodcd::kernels
