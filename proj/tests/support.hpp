#pragma once

// Seeded generators shared by the unit tests and the acceptance harness.

#include <cmath>
#include <cstdint>
#include <vector>

#include "geodcd/geodesic.hpp"
#include "geodcd/graph.hpp"
#include "geodcd/linalg.hpp"
#include "geodcd/rng.hpp"

namespace geodcd::testing {

inline Mat random_matrix(Philox& rng, int rows, int cols) {
  Mat m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = rng.normal();
  return m;
}

inline Mat random_orthonormal(Philox& rng, int rows, int cols) { return orthonormalize(random_matrix(rng, rows, cols)); }

inline Mat random_symmetric(Philox& rng, int d) {
  const Mat a = random_matrix(rng, d, d);
  return 0.5 * (a + a.transpose());
}

// Erdos-Renyi, no self-loops; signed draws -1 with probability 1/2.
inline GraphSnapshot random_graph(Philox& rng, int d, double p, bool directed = false, bool is_signed = false) {
  GraphSnapshot g;
  g.d = d;
  g.directed = directed;
  for (int a = 0; a < d; ++a)
    for (int b = directed ? 0 : a + 1; b < d; ++b) {
      if (a == b) continue;
      if (!rng.bernoulli(p)) continue;
      const double w = is_signed && rng.bernoulli(0.5) ? -1.0 : 1.0;
      g.edges().push_back({a, b, w});
    }
  return g;
}

// k disjoint cliques of s nodes each.
inline GraphSnapshot disjoint_cliques(int k, int s) {
  GraphSnapshot g;
  g.d = k * s;
  for (int c = 0; c < k; ++c)
    for (int a = 0; a < s; ++a)
      for (int b = a + 1; b < s; ++b) g.edges().push_back({c * s + a, c * s + b, 1.0});
  return g;
}

inline std::vector<double> uniform_times(int T) { return default_times(T); }

// Model with orthonormal P = [H Y] and angles in (0.2, 1.2).
inline GeodesicModel random_geodesic(Philox& rng, int d, int k) {
  GeodesicModel m;
  m.P = random_orthonormal(rng, d, 2 * k);
  m.theta = Vec(k);
  for (int j = 0; j < k; ++j) m.theta[j] = 0.2 + rng.uniform();
  return m;
}

// M_i = U(t_i) S_i V_i^T with random positive S_i, V_i (k x m).
inline std::vector<Mat> planted_mcms(Philox& rng, const GeodesicModel& model, const std::vector<double>& times, int m) {
  std::vector<Mat> out;
  const int k = model.k();
  for (double t : times) {
    Vec s(k);
    for (int j = 0; j < k; ++j) s[j] = 1.0 + rng.uniform();
    const Mat v = random_orthonormal(rng, m, k);
    out.push_back(model.evaluate(t) * s.asDiagonal() * v.transpose());
  }
  return out;
}

inline double frob2(const std::vector<Mat>& ms) {
  double s = 0.0;
  for (const auto& m : ms) s += m.squaredNorm();
  return s;
}

// Noise scaled to a Frobenius SNR in decibels, per snapshot.
inline std::vector<Mat> add_noise(Philox& rng, const std::vector<Mat>& ms, double snr_db) {
  std::vector<Mat> out;
  for (const auto& m : ms) {
    Mat n = random_matrix(rng, static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    n *= m.norm() / n.norm() * std::pow(10.0, -snr_db / 20.0);
    out.push_back(m + n);
  }
  return out;
}

}  // namespace geodcd::testing
