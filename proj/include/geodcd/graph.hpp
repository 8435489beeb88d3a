#pragma once

// Snapshot / sequence / partition data model and the JSON file formats.
//
// Undirected edges are stored once (either orientation); the dense adjacency
// is symmetrized on construction. Signed graphs carry negative weights; the
// positive and absolute-negative parts are split on demand.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace geodcd {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct Edge {
  int src = 0;
  int dst = 0;
  double w = 1.0;
  bool operator==(const Edge&) const = default;
};

using EdgeList = std::vector<Edge>;

struct GraphSnapshot {
  int d = 0;
  bool directed = false;
  std::vector<EdgeList> views{EdgeList{}};  // always >= 1 entry
  std::optional<std::pair<int, int>> bipartite_split;

  const EdgeList& edges() const { return views.front(); }
  EdgeList& edges() { return views.front(); }
  int view_count() const { return static_cast<int>(views.size()); }
  bool multiview() const { return views.size() > 1; }
  bool is_signed() const;

  // Dense adjacency of one view, A(src, dst); symmetric when undirected.
  Mat adjacency(int view = 0) const;

  bool operator==(const GraphSnapshot&) const = default;
};

struct SnapshotSequence {
  std::vector<GraphSnapshot> snapshots;
  std::vector<double> times;
  std::vector<std::string> name_table;  // optional external node ids

  int T() const { return static_cast<int>(snapshots.size()); }
  int d() const { return snapshots.empty() ? 0 : snapshots.front().d; }
  bool operator==(const SnapshotSequence&) const = default;
};

// Hard labels (membership empty) or soft memberships (labels hold the argmax).
// Label -1 marks a node without a community (transitioning nodes in the merge
// benchmark); such nodes are skipped by the metrics.
struct Partition {
  std::vector<int> labels;
  Mat membership;
  int k = 0;

  bool soft() const { return membership.size() > 0; }
  int size() const { return static_cast<int>(labels.size()); }
  bool operator==(const Partition& o) const {
    return labels == o.labels && k == o.k && membership.rows() == o.membership.rows() &&
           membership.cols() == o.membership.cols() && membership == o.membership;
  }
};

struct PartitionSequence {
  std::vector<Partition> steps;

  int T() const { return static_cast<int>(steps.size()); }
  std::vector<int> k_per_step() const;
  bool operator==(const PartitionSequence&) const = default;
};

Partition hard_partition(std::vector<int> labels);
Partition soft_partition(Mat membership);

std::vector<double> default_times(int T);

// Throws InputError naming the violated invariant.
void validate(const GraphSnapshot& g);
void validate(const SnapshotSequence& seq);
void validate(const Partition& p);

Vec degrees(const Mat& a);  // row sums
Mat positive_part(const Mat& a);
Mat negative_part(const Mat& a);  // |min(a, 0)|

// Connected components of an undirected snapshot (all views merged).
std::vector<int> components(const GraphSnapshot& g, int* count = nullptr);

GraphSnapshot ensure_connected(const GraphSnapshot& g);

// Removes the listed nodes and reindexes the rest, preserving order.
GraphSnapshot drop_nodes(const GraphSnapshot& g, const std::vector<int>& nodes);
SnapshotSequence drop_nodes(const SnapshotSequence& seq, const std::vector<int>& nodes);

SnapshotSequence load_sequence(const std::string& path);
void dump_sequence(const SnapshotSequence& seq, const std::string& path);

PartitionSequence load_partitions(const std::string& path);
void dump_partitions(const PartitionSequence& parts, const std::string& path);

}  // namespace geodcd
