#include "geodcd/sbm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "geodcd/error.hpp"
#include "geodcd/rng.hpp"

namespace geodcd {

namespace {

constexpr std::array<std::pair<SbmVariant, std::string_view>, 8> kVariantNames{{
    {SbmVariant::SIMPLE, "SIMPLE"},
    {SbmVariant::SSBM, "SSBM"},
    {SbmVariant::MMSBM, "MMSBM"},
    {SbmVariant::DSBM, "DSBM"},
    {SbmVariant::SCBM, "SCBM"},
    {SbmVariant::HSBM, "HSBM"},
    {SbmVariant::MVSBM, "MVSBM"},
    {SbmVariant::MERGE, "MERGE"},
}};

void check_prob(double p, const char* field) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError(std::string("sbm: ") + field + " must lie in [0, 1]");
}

Philox dynamics_rng(const SbmConfig& cfg) { return Philox(cfg.seed, 0); }
Philox snapshot_rng(const SbmConfig& cfg, int i) { return Philox(cfg.seed, 1 + static_cast<std::uint64_t>(i)); }

// Uniform among {0..k-1} minus `current`.
int other_community(Philox& rng, int k, int current) {
  int c = static_cast<int>(rng.below(static_cast<std::uint32_t>(k - 1)));
  return c >= current ? c + 1 : c;
}

// Once-only switching; labels[i] for snapshot i. `choose` picks a destination.
template <class Choose>
std::vector<std::vector<int>> once_only(const std::vector<int>& init, int T, double p_switch, Philox& rng,
                                        Choose choose) {
  std::vector<std::vector<int>> out{init};
  std::vector<bool> switched(init.size(), false);
  for (int i = 1; i < T; ++i) {
    auto cur = out.back();
    for (std::size_t l = 0; l < cur.size(); ++l) {
      if (switched[l]) continue;
      if (!rng.bernoulli(p_switch)) continue;
      const int dest = choose(cur[l]);
      if (dest == cur[l]) continue;
      cur[l] = dest;
      switched[l] = true;
    }
    out.push_back(std::move(cur));
  }
  return out;
}

std::vector<std::vector<int>> simple_dynamics(const SbmConfig& cfg) {
  Philox rng = dynamics_rng(cfg);
  if (cfg.k < 2) return std::vector<std::vector<int>>(cfg.T, initial_blocks(cfg.d, cfg.k));
  return once_only(initial_blocks(cfg.d, cfg.k), cfg.T, cfg.p_switch, rng,
                   [&](int c) { return other_community(rng, cfg.k, c); });
}

EdgeList sample_undirected(int d, const std::vector<int>& z, double p_in, double p_out, Philox& rng) {
  EdgeList e;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (rng.bernoulli(z[i] == z[j] ? p_in : p_out)) e.push_back({i, j, 1.0});
  return e;
}

GraphSnapshot undirected(int d, EdgeList e, bool bridge) {
  GraphSnapshot g;
  g.d = d;
  g.views = {std::move(e)};
  return bridge ? ensure_connected(g) : g;
}

PartitionSequence hard_truth(const std::vector<std::vector<int>>& labels) {
  PartitionSequence ps;
  for (const auto& l : labels) ps.steps.push_back(hard_partition(l));
  return ps;
}

SnapshotSequence with_times(std::vector<GraphSnapshot> snaps) {
  SnapshotSequence seq;
  seq.times = default_times(static_cast<int>(snaps.size()));
  seq.snapshots = std::move(snaps);
  return seq;
}

void check_common(const SbmConfig& cfg) {
  if (cfg.d < 1) throw InputError("sbm: d must be positive");
  if (cfg.T < 1) throw InputError("sbm: T must be positive");
  if (cfg.k < 1) throw InputError("sbm: k must be positive");
  if (cfg.k > cfg.d) throw InputError("sbm: k must not exceed d");
  check_prob(cfg.p_in, "p_in");
  check_prob(cfg.p_out, "p_out");
  check_prob(cfg.p_switch, "p_switch");
}

}  // namespace

std::string_view variant_name(SbmVariant v) {
  for (const auto& [k, n] : kVariantNames)
    if (k == v) return n;
  return "?";
}

SbmVariant variant_from_name(std::string_view name) {
  for (const auto& [k, n] : kVariantNames)
    if (n == name) return k;
  throw InputError("sbm: unknown variant '" + std::string(name) + "'");
}

std::vector<int> HsbmTree::leaves() const {
  std::vector<bool> has_child(parent.size(), false);
  for (int p : parent)
    if (p >= 0) has_child[p] = true;
  std::vector<int> out;
  for (std::size_t v = 0; v < parent.size(); ++v)
    if (!has_child[v]) out.push_back(static_cast<int>(v));
  return out;
}

int HsbmTree::depth(int node) const {
  int dep = 0;
  while (parent[node] >= 0) {
    node = parent[node];
    ++dep;
  }
  return dep;
}

int HsbmTree::lca(int a, int b) const {
  int da = depth(a), db = depth(b);
  while (da > db) {
    a = parent[a];
    --da;
  }
  while (db > da) {
    b = parent[b];
    --db;
  }
  while (a != b) {
    a = parent[a];
    b = parent[b];
  }
  return a;
}

HsbmTree default_hsbm_tree(double root, double internal, double leaf) {
  HsbmTree t;
  t.parent = {-1, 0, 0, 1, 1, 2, 2};
  t.weight = {root, internal, internal, leaf, leaf, leaf, leaf};
  return t;
}

std::vector<int> initial_blocks(int n, int k) {
  std::vector<int> z(n);
  const int base = n / k, rem = n % k;
  int pos = 0;
  for (int c = 0; c < k; ++c) {
    const int size = base + (c < rem ? 1 : 0);
    for (int s = 0; s < size; ++s) z[pos++] = c;
  }
  return z;
}

Mat overlap_phi(int d, int overlap) {
  if (overlap < 0 || overlap > d) throw InputError("overlap_phi: overlap must lie in [0, d]");
  const int pure = d - overlap;
  const int a = (pure + 1) / 2;
  Mat phi = Mat::Zero(d, 2);
  for (int l = 0; l < d; ++l) {
    if (l < a) {
      phi(l, 0) = 1.0;
    } else if (l < a + overlap) {
      phi(l, 0) = phi(l, 1) = 0.5;
    } else {
      phi(l, 1) = 1.0;
    }
  }
  return phi;
}

void validate(const SbmConfig& cfg) {
  check_common(cfg);
  switch (cfg.variant) {
    case SbmVariant::SSBM:
      if (!(cfg.eta_in >= 0.0 && cfg.eta_in < 0.5)) throw InputError("sbm: eta_in must lie in [0, 1/2)");
      if (!(cfg.eta_out >= 0.0 && cfg.eta_out < 0.5)) throw InputError("sbm: eta_out must lie in [0, 1/2)");
      break;
    case SbmVariant::MMSBM: {
      if (cfg.B.rows() != cfg.k || cfg.B.cols() != cfg.k) throw InputError("sbm: B must be k x k");
      if (cfg.Phi.rows() != cfg.d || cfg.Phi.cols() != cfg.k) throw InputError("sbm: Phi must be d x k");
      for (Eigen::Index i = 0; i < cfg.B.size(); ++i) check_prob(cfg.B.data()[i], "B");
      for (Eigen::Index l = 0; l < cfg.Phi.rows(); ++l) {
        if ((cfg.Phi.row(l).array() < 0).any() || std::abs(cfg.Phi.row(l).sum() - 1.0) > 1e-9)
          throw InputError("sbm: Phi rows must be stochastic");
      }
      break;
    }
    case SbmVariant::DSBM: {
      if (cfg.F.rows() != cfg.k || cfg.F.cols() != cfg.k) throw InputError("sbm: F must be k x k");
      for (Eigen::Index i = 0; i < cfg.k; ++i)
        for (Eigen::Index j = 0; j < cfg.k; ++j) {
          check_prob(cfg.F(i, j), "F");
          if (std::abs(cfg.F(i, j) + cfg.F(j, i) - 1.0) > 1e-9) throw InputError("sbm: F must satisfy F + F^T = 1");
        }
      break;
    }
    case SbmVariant::SCBM: {
      if (cfg.B.size() == 0) throw InputError("sbm: SCBM needs B (k_y x k_z)");
      for (Eigen::Index i = 0; i < cfg.B.size(); ++i) check_prob(cfg.B.data()[i], "B");
      check_prob(cfg.p_switch_send, "p_switch_send");
      check_prob(cfg.p_switch_receive, "p_switch_receive");
      const int n1 = cfg.bipartite ? cfg.d / 2 : cfg.d;
      const int n2 = cfg.bipartite ? cfg.d - n1 : cfg.d;
      if (cfg.B.rows() > n1 || cfg.B.cols() > n2) throw InputError("sbm: bipartite split too small for B");
      break;
    }
    case SbmVariant::HSBM: {
      const HsbmTree t = cfg.tree ? *cfg.tree : default_hsbm_tree();
      if (t.parent.empty() || t.parent.size() != t.weight.size()) throw InputError("sbm: malformed tree");
      if (t.parent[0] != -1) throw InputError("sbm: tree node 0 must be the root");
      for (std::size_t v = 1; v < t.parent.size(); ++v)
        if (t.parent[v] < 0 || t.parent[v] >= static_cast<int>(v))
          throw InputError("sbm: malformed tree (parents must precede children)");
      for (double w : t.weight) check_prob(w, "tree weight");
      if (static_cast<int>(t.leaves().size()) > cfg.d) throw InputError("sbm: more leaves than nodes");
      if (!(cfg.leaf_jitter >= 0.0)) throw InputError("sbm: leaf_jitter must be nonnegative");
      break;
    }
    case SbmVariant::MVSBM:
      if (cfg.S < 1) throw InputError("sbm: S must be >= 1");
      break;
    case SbmVariant::MERGE:
      if (cfg.merges < 1 || 2 * cfg.merges > cfg.k) throw InputError("sbm: merges must lie in [1, k/2]");
      if (cfg.merge_start < 1 || cfg.merge_end <= cfg.merge_start || cfg.merge_end >= cfg.T)
        throw InputError("sbm: need 1 <= merge_start < merge_end < T");
      break;
    default:
      break;
  }
}

SbmOutput gen_simple(const SbmConfig& cfg) {
  validate(cfg);
  const auto labels = simple_dynamics(cfg);
  std::vector<GraphSnapshot> snaps;
  for (int i = 0; i < cfg.T; ++i) {
    Philox rng = snapshot_rng(cfg, i);
    snaps.push_back(undirected(cfg.d, sample_undirected(cfg.d, labels[i], cfg.p_in, cfg.p_out, rng), cfg.bridge));
  }
  return {with_times(std::move(snaps)), hard_truth(labels), std::nullopt};
}

SbmOutput gen_ssbm(const SbmConfig& cfg) {
  validate(cfg);
  const auto labels = simple_dynamics(cfg);
  std::vector<GraphSnapshot> snaps;
  for (int i = 0; i < cfg.T; ++i) {
    Philox rng = snapshot_rng(cfg, i);
    const auto& z = labels[i];
    EdgeList e;
    for (int a = 0; a < cfg.d; ++a)
      for (int b = a + 1; b < cfg.d; ++b) {
        const bool same = z[a] == z[b];
        if (!rng.bernoulli(same ? cfg.p_in : cfg.p_out)) continue;
        double w = same ? 1.0 : -1.0;
        if (rng.bernoulli(same ? cfg.eta_in : cfg.eta_out)) w = -w;
        e.push_back({a, b, w});
      }
    snaps.push_back(undirected(cfg.d, std::move(e), false));
  }
  return {with_times(std::move(snaps)), hard_truth(labels), std::nullopt};
}

SbmOutput gen_mmsbm(const SbmConfig& cfg) {
  validate(cfg);
  // distinct membership vectors at time 1, in order of first appearance
  std::vector<Vec> unique;
  std::vector<int> state(cfg.d);
  for (int l = 0; l < cfg.d; ++l) {
    const Vec row = cfg.Phi.row(l).transpose();
    int found = -1;
    for (std::size_t u = 0; u < unique.size(); ++u)
      if ((unique[u] - row).cwiseAbs().maxCoeff() <= 1e-12) found = static_cast<int>(u);
    if (found < 0) {
      found = static_cast<int>(unique.size());
      unique.push_back(row);
    }
    state[l] = found;
  }
  const int n_unique = static_cast<int>(unique.size());
  Philox dyn = dynamics_rng(cfg);
  std::vector<std::vector<int>> states{state};
  for (int i = 1; i < cfg.T; ++i) {
    auto cur = states.back();
    for (int l = 0; l < cfg.d; ++l)
      if (n_unique > 1 && dyn.bernoulli(cfg.p_switch)) cur[l] = other_community(dyn, n_unique, cur[l]);
    states.push_back(std::move(cur));
  }

  std::vector<GraphSnapshot> snaps;
  PartitionSequence truth;
  for (int i = 0; i < cfg.T; ++i) {
    Mat phi(cfg.d, cfg.k);
    for (int l = 0; l < cfg.d; ++l) phi.row(l) = unique[states[i][l]].transpose();
    const Mat prob = phi * cfg.B * phi.transpose();
    Philox rng = snapshot_rng(cfg, i);
    EdgeList e;
    for (int a = 0; a < cfg.d; ++a)
      for (int b = a + 1; b < cfg.d; ++b)
        if (rng.bernoulli(prob(a, b))) e.push_back({a, b, 1.0});
    snaps.push_back(undirected(cfg.d, std::move(e), cfg.bridge));
    truth.steps.push_back(soft_partition(phi));
  }
  return {with_times(std::move(snaps)), std::move(truth), std::nullopt};
}

SbmOutput gen_dsbm(const SbmConfig& cfg) {
  validate(cfg);
  const auto labels = simple_dynamics(cfg);
  std::vector<GraphSnapshot> snaps;
  for (int i = 0; i < cfg.T; ++i) {
    Philox rng = snapshot_rng(cfg, i);
    const auto& z = labels[i];
    GraphSnapshot g;
    g.d = cfg.d;
    g.directed = true;
    for (int a = 0; a < cfg.d; ++a)
      for (int b = a + 1; b < cfg.d; ++b) {
        if (!rng.bernoulli(z[a] == z[b] ? cfg.p_in : cfg.p_out)) continue;
        if (rng.bernoulli(cfg.F(z[a], z[b]))) {
          g.edges().push_back({a, b, 1.0});
        } else {
          g.edges().push_back({b, a, 1.0});
        }
      }
    snaps.push_back(std::move(g));
  }
  return {with_times(std::move(snaps)), hard_truth(labels), std::nullopt};
}

namespace {

// Swap dynamics on one side: nodes [first, first + n) with labels in [0, k).
void swap_step(std::vector<int>& lab, int first, int n, int k, double p, Philox& rng) {
  if (k < 2) return;
  for (int l = first; l < first + n; ++l) {
    if (!rng.bernoulli(p)) continue;
    const int dest = other_community(rng, k, lab[l]);
    std::vector<int> members;
    for (int m = first; m < first + n; ++m)
      if (lab[m] == dest) members.push_back(m);
    if (members.empty()) continue;
    const int partner = members[rng.below(static_cast<std::uint32_t>(members.size()))];
    std::swap(lab[l], lab[partner]);
  }
}

}  // namespace

SbmOutput gen_scbm(const SbmConfig& cfg) {
  validate(cfg);
  const int ky = static_cast<int>(cfg.B.rows()), kz = static_cast<int>(cfg.B.cols());
  const int n1 = cfg.bipartite ? cfg.d / 2 : cfg.d;
  const int n2 = cfg.bipartite ? cfg.d - n1 : cfg.d;
  const int off2 = cfg.bipartite ? n1 : 0;
  std::vector<int> y(cfg.d, -1), z(cfg.d, -1);
  {
    const auto by = initial_blocks(n1, ky);
    const auto bz = initial_blocks(n2, kz);
    for (int l = 0; l < n1; ++l) y[l] = by[l];
    for (int l = 0; l < n2; ++l) z[off2 + l] = bz[l];
  }
  Philox dyn = dynamics_rng(cfg);
  std::vector<std::vector<int>> ys{y}, zs{z};
  for (int i = 1; i < cfg.T; ++i) {
    swap_step(y, 0, n1, ky, cfg.p_switch_send, dyn);
    swap_step(z, off2, n2, kz, cfg.p_switch_receive, dyn);
    ys.push_back(y);
    zs.push_back(z);
  }
  std::vector<GraphSnapshot> snaps;
  for (int i = 0; i < cfg.T; ++i) {
    Philox rng = snapshot_rng(cfg, i);
    GraphSnapshot g;
    g.d = cfg.d;
    g.directed = true;
    if (cfg.bipartite) g.bipartite_split = std::pair{n1, n2};
    for (int a = 0; a < n1; ++a)
      for (int b = off2; b < off2 + n2; ++b) {
        if (a == b) continue;
        if (rng.bernoulli(cfg.B(ys[i][a], zs[i][b]))) g.edges().push_back({a, b, 1.0});
      }
    snaps.push_back(std::move(g));
  }
  return {with_times(std::move(snaps)), hard_truth(ys), hard_truth(zs)};
}

SbmOutput gen_hsbm(const SbmConfig& cfg) {
  validate(cfg);
  HsbmTree tree = cfg.tree ? *cfg.tree : default_hsbm_tree();
  const auto leaves = tree.leaves();
  const int L = static_cast<int>(leaves.size());
  Philox dyn = dynamics_rng(cfg);
  if (cfg.leaf_jitter > 0.0)
    for (int v : leaves)
      tree.weight[v] = std::clamp(tree.weight[v] + cfg.leaf_jitter * (2.0 * dyn.uniform() - 1.0), 0.0, 1.0);
  // siblings by leaf index
  std::vector<std::vector<int>> siblings(L);
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b)
      if (a != b && tree.parent[leaves[a]] == tree.parent[leaves[b]]) siblings[a].push_back(b);
  const auto labels = once_only(initial_blocks(cfg.d, L), cfg.T, cfg.p_switch, dyn, [&](int c) {
    const auto& s = siblings[c];
    return s.empty() ? c : s[dyn.below(static_cast<std::uint32_t>(s.size()))];
  });
  Mat prob(L, L);
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b) prob(a, b) = tree.weight[tree.lca(leaves[a], leaves[b])];
  std::vector<GraphSnapshot> snaps;
  for (int i = 0; i < cfg.T; ++i) {
    Philox rng = snapshot_rng(cfg, i);
    const auto& z = labels[i];
    EdgeList e;
    for (int a = 0; a < cfg.d; ++a)
      for (int b = a + 1; b < cfg.d; ++b)
        if (rng.bernoulli(prob(z[a], z[b]))) e.push_back({a, b, 1.0});
    snaps.push_back(undirected(cfg.d, std::move(e), cfg.bridge));
  }
  return {with_times(std::move(snaps)), hard_truth(labels), std::nullopt};
}

SbmOutput gen_mvsbm(const SbmConfig& cfg) {
  validate(cfg);
  const auto labels = simple_dynamics(cfg);
  std::vector<GraphSnapshot> snaps;
  for (int i = 0; i < cfg.T; ++i) {
    Philox rng = snapshot_rng(cfg, i);
    GraphSnapshot g;
    g.d = cfg.d;
    g.views.clear();
    for (int s = 0; s < cfg.S; ++s)
      g.views.push_back(undirected(cfg.d, sample_undirected(cfg.d, labels[i], cfg.p_in, cfg.p_out, rng), cfg.bridge)
                            .edges());
    snaps.push_back(std::move(g));
  }
  return {with_times(std::move(snaps)), hard_truth(labels), std::nullopt};
}

SbmOutput gen_merge(const SbmConfig& cfg) {
  validate(cfg);
  const auto z = initial_blocks(cfg.d, cfg.k);
  // community k - 1 - m is absorbed by community k - 1 - merges - m
  std::vector<int> absorber(cfg.k, -1);
  for (int m = 0; m < cfg.merges; ++m) absorber[cfg.k - 1 - m] = cfg.k - 1 - cfg.merges - m;
  auto merging_pair = [&](int a, int b) { return absorber[a] == b || absorber[b] == a; };
  const double span = cfg.merge_end - cfg.merge_start + 1;

  std::vector<GraphSnapshot> snaps;
  PartitionSequence truth;
  for (int i = 0; i < cfg.T; ++i) {
    double ramp = 0.0;
    if (i >= cfg.merge_end) {
      ramp = 1.0;
    } else if (i >= cfg.merge_start) {
      ramp = (i - cfg.merge_start + 1) / span;
    }
    const double p_pair = cfg.p_out + ramp * (cfg.p_in - cfg.p_out);
    Philox rng = snapshot_rng(cfg, i);
    EdgeList e;
    for (int a = 0; a < cfg.d; ++a)
      for (int b = a + 1; b < cfg.d; ++b) {
        double p = cfg.p_out;
        if (z[a] == z[b]) {
          p = cfg.p_in;
        } else if (merging_pair(z[a], z[b])) {
          p = p_pair;
        }
        if (rng.bernoulli(p)) e.push_back({a, b, 1.0});
      }
    snaps.push_back(undirected(cfg.d, std::move(e), cfg.bridge));

    std::vector<int> lab(z);
    if (i >= cfg.merge_start) {
      for (int& l : lab)
        if (absorber[l] >= 0) l = i < cfg.merge_end ? -1 : absorber[l];
    }
    Partition p;
    p.labels = std::move(lab);
    p.k = i < cfg.merge_start ? cfg.k : cfg.k - cfg.merges;
    truth.steps.push_back(std::move(p));
  }
  return {with_times(std::move(snaps)), std::move(truth), std::nullopt};
}

SbmOutput generate(const SbmConfig& cfg) {
  switch (cfg.variant) {
    case SbmVariant::SIMPLE: return gen_simple(cfg);
    case SbmVariant::SSBM: return gen_ssbm(cfg);
    case SbmVariant::MMSBM: return gen_mmsbm(cfg);
    case SbmVariant::DSBM: return gen_dsbm(cfg);
    case SbmVariant::SCBM: return gen_scbm(cfg);
    case SbmVariant::HSBM: return gen_hsbm(cfg);
    case SbmVariant::MVSBM: return gen_mvsbm(cfg);
    case SbmVariant::MERGE: return gen_merge(cfg);
  }
  throw InputError("sbm: unknown variant");
}

}  // namespace geodcd
