#pragma once

// Euclidean clustering of embedding rows (row l = node l).

#include <cstdint>
#include <optional>
#include <vector>

#include "geodcd/linalg.hpp"

namespace geodcd {

struct ClusterOptions {
  int max_iter = 300;
  double tol = 1e-6;  // max center movement
  int restarts = 1;   // kmeans runs; the first is furthest-point seeded, the rest k-means++
};

struct ClusterResult {
  std::vector<int> labels;
  Mat memberships;  // d x k_c, soft clusterers only
  Mat centers;      // k_c x k
  double inertia = 0.0;
  int iterations = 0;
  std::vector<double> inertia_trace;  // kmeans: per Lloyd iteration
  bool has_empty_cluster = false;
};

ClusterResult kmeans(const Mat& emb, int k_c, std::uint64_t seed,
                     const std::optional<std::vector<int>>& warm_start = std::nullopt,
                     const ClusterOptions& opt = {});

ClusterResult sign_split(const Mat& emb);

ClusterResult kmedians(const Mat& emb, int k_c, std::uint64_t seed, const ClusterOptions& opt = {});

ClusterResult fuzzy_cmeans(const Mat& emb, int k_c, double m, std::uint64_t seed,
                           const std::optional<std::vector<int>>& warm_start = std::nullopt,
                           const ClusterOptions& opt = {});

// Least-squares coefficients of each row in the span of the centers, clamped
// at zero and renormalized; all-zero rows get the uniform membership.
Mat soft_membership_from_centers(const Mat& emb, const Mat& centers);

// Binary d x k indicator: entry > thresh. Rows with no entry above keep their argmax.
Mat threshold_membership(const Mat& membership, double thresh);

// Furthest-point seeding: first center drawn from the seed, the rest greedy.
std::vector<int> furthest_point_seeds(const Mat& emb, int k_c, std::uint64_t seed);
// D^2-weighted sampling.
std::vector<int> kmeanspp_seeds(const Mat& emb, int k_c, std::uint64_t seed);

}  // namespace geodcd
