#include "geodcd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "geodcd/error.hpp"

namespace geodcd {

bool GraphSnapshot::is_signed() const {
  for (const auto& view : views)
    for (const auto& e : view)
      if (e.w < 0.0) return true;
  return false;
}

Mat GraphSnapshot::adjacency(int view) const {
  Mat a = Mat::Zero(d, d);
  for (const auto& e : views.at(view)) {
    a(e.src, e.dst) += e.w;
    if (!directed) a(e.dst, e.src) += e.w;
  }
  return a;
}

std::vector<int> PartitionSequence::k_per_step() const {
  std::vector<int> out;
  out.reserve(steps.size());
  for (const auto& p : steps) out.push_back(p.k);
  return out;
}

Partition hard_partition(std::vector<int> labels) {
  Partition p;
  int mx = -1;
  for (int l : labels) mx = std::max(mx, l);
  p.labels = std::move(labels);
  p.k = mx + 1;
  return p;
}

Partition soft_partition(Mat membership) {
  Partition p;
  p.k = static_cast<int>(membership.cols());
  p.labels.resize(membership.rows());
  for (Eigen::Index i = 0; i < membership.rows(); ++i) {
    Eigen::Index j = 0;
    membership.row(i).maxCoeff(&j);
    p.labels[i] = static_cast<int>(j);
  }
  p.membership = std::move(membership);
  return p;
}

std::vector<double> default_times(int T) {
  std::vector<double> t(T, 0.0);
  for (int i = 0; i < T; ++i) t[i] = T == 1 ? 0.0 : static_cast<double>(i) / (T - 1);
  return t;
}

void validate(const GraphSnapshot& g) {
  if (g.d <= 0) throw InputError("invariant: d must be positive");
  if (g.views.empty()) throw InputError("invariant: snapshot needs at least one view");
  for (const auto& view : g.views) {
    std::set<std::pair<int, int>> seen;
    for (const auto& e : view) {
      if (e.src < 0 || e.src >= g.d || e.dst < 0 || e.dst >= g.d)
        throw InputError("invariant: node index out of range [0, d)");
      if (e.src == e.dst) throw InputError("invariant: self-loop at node " + std::to_string(e.src));
      if (!std::isfinite(e.w)) throw InputError("invariant: non-finite edge weight");
      const std::pair<int, int> key =
          g.directed ? std::pair{e.src, e.dst} : std::pair{std::min(e.src, e.dst), std::max(e.src, e.dst)};
      if (!seen.insert(key).second)
        throw InputError("invariant: duplicate edge (" + std::to_string(e.src) + ", " +
                         std::to_string(e.dst) + ")");
      if (g.bipartite_split) {
        const int n1 = g.bipartite_split->first;
        if ((e.src < n1) == (e.dst < n1))
          throw InputError("invariant: edge does not cross the bipartite split");
      }
    }
  }
  if (g.bipartite_split) {
    const auto [n1, n2] = *g.bipartite_split;
    if (n1 <= 0 || n2 <= 0 || n1 + n2 != g.d)
      throw InputError("invariant: bipartite_split must sum to d");
  }
}

void validate(const SnapshotSequence& seq) {
  if (seq.snapshots.empty()) throw InputError("invariant: sequence has no snapshots");
  if (seq.times.size() != seq.snapshots.size())
    throw InputError("invariant: times has length != T");
  const auto& first = seq.snapshots.front();
  for (std::size_t i = 0; i < seq.snapshots.size(); ++i) {
    const auto& g = seq.snapshots[i];
    validate(g);
    if (g.d != first.d || g.directed != first.directed || g.view_count() != first.view_count() ||
        g.bipartite_split != first.bipartite_split)
      throw InputError("invariant: snapshot " + std::to_string(i) +
                       " differs from snapshot 0 in d or modality flags");
    if (i > 0 && !(seq.times[i] > seq.times[i - 1]))
      throw InputError("invariant: times must be strictly increasing");
  }
  if (!seq.name_table.empty() && static_cast<int>(seq.name_table.size()) != first.d)
    throw InputError("invariant: name_table length != d");
}

void validate(const Partition& p) {
  if (p.soft()) {
    if (p.membership.rows() != p.size() || p.membership.cols() != p.k)
      throw InputError("invariant: membership shape must be d x k");
    for (Eigen::Index i = 0; i < p.membership.rows(); ++i) {
      if ((p.membership.row(i).array() < 0.0).any())
        throw InputError("invariant: negative membership in row " + std::to_string(i));
      const double s = p.membership.row(i).sum();
      if (std::abs(s - 1.0) > 1e-9 && p.labels[i] != -1)
        throw InputError("invariant: membership row " + std::to_string(i) + " does not sum to 1");
    }
  }
  for (int l : p.labels)
    if (l < -1 || l >= p.k) throw InputError("invariant: label outside [0, k)");
}

Vec degrees(const Mat& a) { return a.rowwise().sum(); }

Mat positive_part(const Mat& a) { return a.cwiseMax(0.0); }

Mat negative_part(const Mat& a) { return (-a).cwiseMax(0.0); }

std::vector<int> components(const GraphSnapshot& g, int* count) {
  std::vector<std::vector<int>> adj(g.d);
  for (const auto& view : g.views)
    for (const auto& e : view) {
      adj[e.src].push_back(e.dst);
      adj[e.dst].push_back(e.src);
    }
  std::vector<int> comp(g.d, -1);
  int c = 0;
  std::vector<int> stack;
  for (int s = 0; s < g.d; ++s) {
    if (comp[s] != -1) continue;
    comp[s] = c;
    stack.assign(1, s);
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : adj[u])
        if (comp[v] == -1) {
          comp[v] = c;
          stack.push_back(v);
        }
    }
    ++c;
  }
  if (count) *count = c;
  return comp;
}

GraphSnapshot ensure_connected(const GraphSnapshot& g) {
  if (g.directed) throw InputError("ensure_connected: directed input, symmetrize first");
  int nc = 0;
  const auto comp = components(g, &nc);
  if (nc <= 1) return g;
  std::vector<int> size(nc, 0), rep(nc, -1);
  for (int v = 0; v < g.d; ++v) {
    ++size[comp[v]];
    if (rep[comp[v]] == -1) rep[comp[v]] = v;
  }
  const int largest = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());
  GraphSnapshot out = g;
  for (int c = 0; c < nc; ++c) {
    if (c == largest) continue;
    const int a = rep[c], b = rep[largest];
    if (g.bipartite_split) {
      // keep the bridge crossing the split
      const int n1 = g.bipartite_split->first;
      int partner = -1;
      for (int v = 0; v < g.d; ++v)
        if (comp[v] == largest && (v < n1) != (a < n1)) {
          partner = v;
          break;
        }
      if (partner == -1) throw InputError("ensure_connected: no bipartite-compatible bridge");
      out.edges().push_back({a, partner, 1.0});
    } else {
      out.edges().push_back({std::min(a, b), std::max(a, b), 1.0});
    }
  }
  return out;
}

GraphSnapshot drop_nodes(const GraphSnapshot& g, const std::vector<int>& nodes) {
  std::vector<int> remap(g.d, 0);
  for (int v : nodes) {
    if (v < 0 || v >= g.d) throw InputError("drop_nodes: node index out of range");
    remap[v] = -1;
  }
  int next = 0;
  int kept_first = 0;
  for (int v = 0; v < g.d; ++v) {
    if (remap[v] == -1) continue;
    remap[v] = next++;
    if (g.bipartite_split && v < g.bipartite_split->first) ++kept_first;
  }
  GraphSnapshot out;
  out.d = next;
  out.directed = g.directed;
  out.views.assign(g.views.size(), {});
  for (std::size_t s = 0; s < g.views.size(); ++s)
    for (const auto& e : g.views[s])
      if (remap[e.src] >= 0 && remap[e.dst] >= 0)
        out.views[s].push_back({remap[e.src], remap[e.dst], e.w});
  if (g.bipartite_split) out.bipartite_split = std::pair{kept_first, next - kept_first};
  return out;
}

SnapshotSequence drop_nodes(const SnapshotSequence& seq, const std::vector<int>& nodes) {
  SnapshotSequence out;
  out.times = seq.times;
  for (const auto& g : seq.snapshots) out.snapshots.push_back(drop_nodes(g, nodes));
  if (!seq.name_table.empty()) {
    std::vector<bool> gone(seq.name_table.size(), false);
    for (int v : nodes) gone[v] = true;
    for (std::size_t v = 0; v < seq.name_table.size(); ++v)
      if (!gone[v]) out.name_table.push_back(seq.name_table[v]);
  }
  return out;
}

}  // namespace geodcd
