#pragma once

// Seeded dynamic stochastic block models. Stream 0 of the seed drives the
// community dynamics, stream 1 + i draws the edges of snapshot i, so
// snapshots can be generated in any order.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geodcd/graph.hpp"

namespace geodcd {

enum class SbmVariant { SIMPLE, SSBM, MMSBM, DSBM, SCBM, HSBM, MVSBM, MERGE };

std::string_view variant_name(SbmVariant v);
SbmVariant variant_from_name(std::string_view name);

// Rooted tree; node 0 is the root, parent[0] = -1. Leaves are the planted
// communities, numbered in increasing node order.
struct HsbmTree {
  std::vector<int> parent;
  std::vector<double> weight;

  std::vector<int> leaves() const;
  int lca(int a, int b) const;
  int depth(int node) const;
};

// Depth-2 binary tree: root, two internal nodes, four leaves.
HsbmTree default_hsbm_tree(double root = 0.1, double internal = 0.25, double leaf = 0.4);

struct SbmConfig {
  SbmVariant variant = SbmVariant::SIMPLE;
  int d = 120;
  int T = 20;
  int k = 2;
  double p_in = 0.3;
  double p_out = 0.2;
  double p_switch = 1e-2;
  double p_switch_send = 1e-2;
  double p_switch_receive = 1e-2;
  double eta_in = 0.0;
  double eta_out = 0.0;
  Mat F;    // DSBM orientation, k x k
  Mat B;    // MMSBM k x k, SCBM k_y x k_z
  Mat Phi;  // MMSBM d x k initial memberships
  std::optional<HsbmTree> tree;
  double leaf_jitter = 0.0;  // HSBM: leaf weights drawn in weight +- jitter
  int S = 1;                 // MVSBM views
  bool bipartite = false;    // SCBM: V1 = first d/2 nodes send, V2 = rest receive
  bool bridge = true;        // ensure_connected on undirected snapshots
  // MERGE: k communities, the last 2 * merges of them merge pairwise into
  // earlier ones over snapshots [merge_start, merge_end).
  int merges = 2;
  int merge_start = 70;
  int merge_end = 140;
  std::uint64_t seed = 0;
};

void validate(const SbmConfig& cfg);

struct SbmOutput {
  SnapshotSequence seq;
  PartitionSequence truth;                        // sending side for SCBM
  std::optional<PartitionSequence> truth_receive;  // SCBM only
};

SbmOutput generate(const SbmConfig& cfg);

SbmOutput gen_simple(const SbmConfig& cfg);
SbmOutput gen_ssbm(const SbmConfig& cfg);
SbmOutput gen_mmsbm(const SbmConfig& cfg);
SbmOutput gen_dsbm(const SbmConfig& cfg);
SbmOutput gen_scbm(const SbmConfig& cfg);
SbmOutput gen_hsbm(const SbmConfig& cfg);
SbmOutput gen_mvsbm(const SbmConfig& cfg);
SbmOutput gen_merge(const SbmConfig& cfg);

// Contiguous equal blocks, remainder to the first communities.
std::vector<int> initial_blocks(int n, int k);

// Overlap memberships: a / overlap / b split of d nodes over two
// communities, overlap nodes at (1/2, 1/2).
Mat overlap_phi(int d, int overlap);

}  // namespace geodcd
