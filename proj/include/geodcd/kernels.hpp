#pragma once

// Dense double-precision kernels behind the hot loops (panel products for the
// geodesic fit, point-to-center distances for the clusterers).
//
// Every kernel has a portable scalar reference and, on x86-64, an AVX2/FMA
// variant compiled in its own translation unit. The variant is picked once at
// first use from CPUID; GEODCD_SIMD=scalar|avx2 in the environment overrides
// the choice (an unavailable ISA falls back to scalar).

#include <cstddef>
#include <span>
#include <string_view>

namespace geodcd::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Column-major dense view: element (r, c) lives at data[r + c * ld].
struct ConstPanel {
  const double* data;
  std::size_t rows;
  std::size_t cols;
  std::size_t ld;
};

struct Panel {
  double* data;
  std::size_t rows;
  std::size_t cols;
  std::size_t ld;
};

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  double (*l1_distance)(const double* a, const double* b, std::size_t n);
  // out = a * x, shapes (m x n) * (n x p) -> (m x p). out must not alias.
  void (*gemm_nn)(ConstPanel a, ConstPanel x, Panel out);
  // out = a^T * x, shapes (m x n)^T * (m x p) -> (n x p). out must not alias.
  void (*gemm_tn)(ConstPanel a, ConstPanel x, Panel out);
};

const KernelTable& scalar_table();

/// Null when the binary was built without the AVX2 translation unit.
const KernelTable* avx2_table();

bool cpu_supports(Isa isa);

/// Table for the requested ISA if it is compiled in and supported, else scalar.
const KernelTable& table_for(Isa isa);

/// The table chosen for this process (CPUID + GEODCD_SIMD override).
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}

inline double l1_distance(std::span<const double> a, std::span<const double> b) {
  return active().l1_distance(a.data(), b.data(), a.size());
}

}  // namespace geodcd::kernels
