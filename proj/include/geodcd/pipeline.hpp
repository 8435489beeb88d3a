#pragma once

// Dynamic community detection: MCMs -> geodesic fit -> per-snapshot
// clustering of U(t_i), in fixed-k and variable-k form, plus the per-snapshot
// static baseline.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "geodcd/cluster.hpp"
#include "geodcd/geodesic.hpp"
#include "geodcd/graph.hpp"
#include "geodcd/mcm.hpp"

namespace geodcd {

struct PipelineConfig {
  MethodSpec method;
  int k_c = 2;
  std::optional<int> k_e;  // default: method-dependent
  bool variable = false;
  int k_min = 2;
  int k_max = 10;
  FitOptions fit;
  std::uint64_t seed = 0;
  double gaussian_sigma = 1.0;
  bool warm_start = true;
  std::optional<bool> row_normalize;  // default: method-dependent
  bool align = true;
  int kmeans_restarts = 1;
};

void validate(const PipelineConfig& cfg);

// Embedding rank for k_c communities: k_c - 1 for SMM, SRSC and power means
// with p >= 1, k_c otherwise.
int default_embedding_rank(const MethodSpec& spec, int k_c);
bool default_row_normalize(Method m);

struct BenefitTable {
  int k_min = 0;
  Mat H;         // (k_max - k_min + 1) x T modularity
  Mat filtered;  // after the Gaussian filter along time
  std::vector<int> chosen;  // k_{c,i}
};

struct DetectResult {
  PartitionSequence parts;
  FitReport report;
  std::optional<GeodesicModel> model;
  std::optional<BenefitTable> benefit;
};

DetectResult detect_fixed_k(const SnapshotSequence& seq, const PipelineConfig& cfg);
PartitionSequence detect_static(const SnapshotSequence& seq, const PipelineConfig& cfg);
DetectResult detect_variable_k(const SnapshotSequence& seq, const PipelineConfig& cfg);

// Fixed or variable according to cfg.variable.
DetectResult detect(const SnapshotSequence& seq, const PipelineConfig& cfg);

// Per-snapshot modularity argmax over k_lo..k_hi, then the mode; ties go to
// the smallest k.
int select_k_by_modularity(const SnapshotSequence& seq, const PipelineConfig& cfg, int k_lo, int k_hi);

struct StructureCheck {
  Vec sigma;  // singular values of X = [u_1..u_T, -u_1..-u_T]
  Mat proj;   // 2T x 2 planar PCA coordinates, columns of X in order
};

StructureCheck geodesic_structure_check(const std::vector<Mat>& mcms);

// One MCM per snapshot for the configured method.
std::vector<Mat> build_mcms(const SnapshotSequence& seq, const MethodSpec& spec);

// Discrete Gaussian, truncated at 4 sigma, reflect padding. sigma = 0 copies.
std::vector<double> gaussian_filter(const std::vector<double>& x, double sigma);

// Align curr to prev (Hungarian on overlaps), then pack the ids into [0, k).
Partition align_partition(const Partition& prev, const Partition& curr);

}  // namespace geodcd
