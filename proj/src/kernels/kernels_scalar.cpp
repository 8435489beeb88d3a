#include "geodcd/kernels.hpp"

#include <cmath>

namespace geodcd::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

double l1_distance_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::abs(a[i] - b[i]);
  return s;
}

void gemm_nn_scalar(ConstPanel a, ConstPanel x, Panel out) {
  for (std::size_t j = 0; j < x.cols; ++j) {
    double* y = out.data + j * out.ld;
    for (std::size_t r = 0; r < a.rows; ++r) y[r] = 0.0;
    for (std::size_t l = 0; l < a.cols; ++l) {
      const double s = x.data[l + j * x.ld];
      if (s == 0.0) continue;
      const double* col = a.data + l * a.ld;
      for (std::size_t r = 0; r < a.rows; ++r) y[r] += col[r] * s;
    }
  }
}

void gemm_tn_scalar(ConstPanel a, ConstPanel x, Panel out) {
  for (std::size_t l = 0; l < a.cols; ++l) {
    const double* col = a.data + l * a.ld;
    for (std::size_t j = 0; j < x.cols; ++j) {
      out.data[l + j * out.ld] = dot_scalar(col, x.data + j * x.ld, a.rows);
    }
  }
}

constexpr KernelTable kScalar{
    Isa::scalar,     dot_scalar,     squared_distance_scalar,
    l1_distance_scalar, gemm_nn_scalar, gemm_tn_scalar,
};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace geodcd::kernels
