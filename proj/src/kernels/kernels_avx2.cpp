// Compiled with -mavx2 -mfma; only reached after a CPUID check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "geodcd/kernels.hpp"

namespace geodcd::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_distance_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

double l1_distance_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::abs(a[i] - b[i]);
  return s;
}

// Tile sizes keep a (kRowTile x kInnerTile) block of `a` resident in L2 while
// every column block of `x` streams over it.
constexpr std::size_t kRowTile = 64;
constexpr std::size_t kInnerTile = 256;

void gemm_nn_avx2(ConstPanel a, ConstPanel x, Panel out) {
  const std::size_t m = a.rows;
  const std::size_t n = a.cols;
  const std::size_t p = x.cols;
  for (std::size_t j = 0; j < p; ++j) std::fill_n(out.data + j * out.ld, m, 0.0);

  for (std::size_t l0 = 0; l0 < n; l0 += kInnerTile) {
    const std::size_t l1 = std::min(n, l0 + kInnerTile);
    for (std::size_t r0 = 0; r0 < m; r0 += kRowTile) {
      const std::size_t r1 = std::min(m, r0 + kRowTile);
      std::size_t j = 0;
      for (; j + 4 <= p; j += 4) {
        const double* x0 = x.data + (j + 0) * x.ld;
        const double* x1 = x.data + (j + 1) * x.ld;
        const double* x2 = x.data + (j + 2) * x.ld;
        const double* x3 = x.data + (j + 3) * x.ld;
        double* y0 = out.data + (j + 0) * out.ld;
        double* y1 = out.data + (j + 1) * out.ld;
        double* y2 = out.data + (j + 2) * out.ld;
        double* y3 = out.data + (j + 3) * out.ld;
        std::size_t r = r0;
        for (; r + 8 <= r1; r += 8) {
          __m256d c00 = _mm256_loadu_pd(y0 + r), c10 = _mm256_loadu_pd(y0 + r + 4);
          __m256d c01 = _mm256_loadu_pd(y1 + r), c11 = _mm256_loadu_pd(y1 + r + 4);
          __m256d c02 = _mm256_loadu_pd(y2 + r), c12 = _mm256_loadu_pd(y2 + r + 4);
          __m256d c03 = _mm256_loadu_pd(y3 + r), c13 = _mm256_loadu_pd(y3 + r + 4);
          for (std::size_t l = l0; l < l1; ++l) {
            const double* col = a.data + l * a.ld + r;
            const __m256d a0 = _mm256_loadu_pd(col);
            const __m256d a1 = _mm256_loadu_pd(col + 4);
            __m256d b = _mm256_broadcast_sd(x0 + l);
            c00 = _mm256_fmadd_pd(a0, b, c00);
            c10 = _mm256_fmadd_pd(a1, b, c10);
            b = _mm256_broadcast_sd(x1 + l);
            c01 = _mm256_fmadd_pd(a0, b, c01);
            c11 = _mm256_fmadd_pd(a1, b, c11);
            b = _mm256_broadcast_sd(x2 + l);
            c02 = _mm256_fmadd_pd(a0, b, c02);
            c12 = _mm256_fmadd_pd(a1, b, c12);
            b = _mm256_broadcast_sd(x3 + l);
            c03 = _mm256_fmadd_pd(a0, b, c03);
            c13 = _mm256_fmadd_pd(a1, b, c13);
          }
          _mm256_storeu_pd(y0 + r, c00), _mm256_storeu_pd(y0 + r + 4, c10);
          _mm256_storeu_pd(y1 + r, c01), _mm256_storeu_pd(y1 + r + 4, c11);
          _mm256_storeu_pd(y2 + r, c02), _mm256_storeu_pd(y2 + r + 4, c12);
          _mm256_storeu_pd(y3 + r, c03), _mm256_storeu_pd(y3 + r + 4, c13);
        }
        for (; r < r1; ++r) {
          double s0 = y0[r], s1 = y1[r], s2 = y2[r], s3 = y3[r];
          for (std::size_t l = l0; l < l1; ++l) {
            const double v = a.data[r + l * a.ld];
            s0 += v * x0[l];
            s1 += v * x1[l];
            s2 += v * x2[l];
            s3 += v * x3[l];
          }
          y0[r] = s0, y1[r] = s1, y2[r] = s2, y3[r] = s3;
        }
      }
      for (; j < p; ++j) {
        const double* xj = x.data + j * x.ld;
        double* yj = out.data + j * out.ld;
        std::size_t r = r0;
        for (; r + 8 <= r1; r += 8) {
          __m256d c0 = _mm256_loadu_pd(yj + r), c1 = _mm256_loadu_pd(yj + r + 4);
          for (std::size_t l = l0; l < l1; ++l) {
            const double* col = a.data + l * a.ld + r;
            const __m256d b = _mm256_broadcast_sd(xj + l);
            c0 = _mm256_fmadd_pd(_mm256_loadu_pd(col), b, c0);
            c1 = _mm256_fmadd_pd(_mm256_loadu_pd(col + 4), b, c1);
          }
          _mm256_storeu_pd(yj + r, c0);
          _mm256_storeu_pd(yj + r + 4, c1);
        }
        for (; r < r1; ++r) {
          double s = yj[r];
          for (std::size_t l = l0; l < l1; ++l) s += a.data[r + l * a.ld] * xj[l];
          yj[r] = s;
        }
      }
    }
  }
}

void gemm_tn_avx2(ConstPanel a, ConstPanel x, Panel out) {
  const std::size_t m = a.rows;
  const std::size_t p = x.cols;
  for (std::size_t l = 0; l < a.cols; ++l) {
    const double* col = a.data + l * a.ld;
    std::size_t j = 0;
    for (; j + 4 <= p; j += 4) {
      const double* x0 = x.data + (j + 0) * x.ld;
      const double* x1 = x.data + (j + 1) * x.ld;
      const double* x2 = x.data + (j + 2) * x.ld;
      const double* x3 = x.data + (j + 3) * x.ld;
      __m256d c0 = _mm256_setzero_pd(), c1 = _mm256_setzero_pd();
      __m256d c2 = _mm256_setzero_pd(), c3 = _mm256_setzero_pd();
      std::size_t r = 0;
      for (; r + 4 <= m; r += 4) {
        const __m256d av = _mm256_loadu_pd(col + r);
        c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(x0 + r), c0);
        c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(x1 + r), c1);
        c2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(x2 + r), c2);
        c3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(x3 + r), c3);
      }
      double s0 = hsum(c0), s1 = hsum(c1), s2 = hsum(c2), s3 = hsum(c3);
      for (; r < m; ++r) {
        s0 += col[r] * x0[r];
        s1 += col[r] * x1[r];
        s2 += col[r] * x2[r];
        s3 += col[r] * x3[r];
      }
      out.data[l + (j + 0) * out.ld] = s0;
      out.data[l + (j + 1) * out.ld] = s1;
      out.data[l + (j + 2) * out.ld] = s2;
      out.data[l + (j + 3) * out.ld] = s3;
    }
    for (; j < p; ++j) out.data[l + j * out.ld] = dot_avx2(col, x.data + j * x.ld, m);
  }
}

constexpr KernelTable kAvx2{
    Isa::avx2,       dot_avx2,     squared_distance_avx2,
    l1_distance_avx2, gemm_nn_avx2, gemm_tn_avx2,
};

}  // namespace

const KernelTable* avx2_table_impl() { return &kAvx2; }

}  // namespace geodcd::kernels
