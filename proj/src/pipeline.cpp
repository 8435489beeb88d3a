#include "geodcd/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "geodcd/error.hpp"
#include "geodcd/metrics.hpp"

namespace geodcd {

namespace {

// Rows of the MCM / embedding for a method: the whole node set, or one side
// of a bipartite split for co-clustering.
struct Side {
  int offset = 0;
  int rows = 0;
};

Side side_of(const GraphSnapshot& g, Method m) {
  if (g.bipartite_split && (m == Method::SCC_SEND || m == Method::SCC_RECEIVE)) {
    const auto [n1, n2] = *g.bipartite_split;
    return m == Method::SCC_SEND ? Side{0, n1} : Side{n1, n2};
  }
  return {0, g.d};
}

std::uint64_t snapshot_seed(std::uint64_t seed, int i) {
  return seed * 0x100000001B3ull + static_cast<std::uint64_t>(i) + 1;
}

int embedding_rank(const PipelineConfig& cfg, int k_c) {
  return cfg.k_e ? *cfg.k_e : default_embedding_rank(cfg.method, k_c);
}

bool row_norm(const PipelineConfig& cfg) {
  return cfg.row_normalize ? *cfg.row_normalize : default_row_normalize(cfg.method.method);
}


// Cluster one embedding (side rows only) into a full-length partition.
Partition cluster_embedding(const Mat& u, const GraphSnapshot& g, const PipelineConfig& cfg, int k_c, int i,
                            const Partition* prev) {
  const Method m = cfg.method.method;
  const Side side = side_of(g, m);
  if (u.rows() != side.rows) throw MethodError("pipeline: embedding rows do not match the snapshot");
  if (k_c > side.rows) throw MethodError("pipeline: k_c exceeds the number of nodes");
  const std::uint64_t seed = snapshot_seed(cfg.seed, i);
  ClusterOptions opt;
  opt.restarts = cfg.kmeans_restarts;

  std::optional<std::vector<int>> warm;
  if (prev && cfg.warm_start) {
    std::vector<int> w(side.rows);
    for (int r = 0; r < side.rows; ++r) w[r] = prev->labels[side.offset + r];
    warm = std::move(w);
  }

  auto full_labels = [&](const std::vector<int>& lab) {
    std::vector<int> out(g.d, -1);
    for (int r = 0; r < side.rows; ++r) out[side.offset + r] = lab[r];
    return out;
  };

  if (m == Method::OSC) {
    Mat x = overlap_embedding(g.adjacency(), u);
    if (row_norm(cfg)) x = normalize_rows(x);
    const ClusterResult cr = kmedians(x, k_c, seed, opt);
    return soft_partition(soft_membership_from_centers(x, cr.centers));
  }
  const Mat x = row_norm(cfg) ? normalize_rows(u) : u;
  if (m == Method::CSC) {
    const ClusterResult cr = fuzzy_cmeans(x, k_c, cfg.method.fuzzifier, seed, warm, opt);
    return soft_partition(cr.memberships);
  }
  ClusterResult cr;
  if (x.cols() == 1 && k_c == 2) {
    cr = sign_split(x);
  } else {
    cr = kmeans(x, k_c, seed, warm, opt);
  }
  Partition p = hard_partition(full_labels(cr.labels));
  p.k = k_c;
  return p;
}

std::vector<double> times_of(const SnapshotSequence& seq) {
  return seq.times.empty() ? default_times(seq.T()) : seq.times;
}

void check_sequence(const SnapshotSequence& seq) {
  if (seq.T() < 1) throw InputError("pipeline: empty sequence");
}

// Geodesic fit at rank k_e on the method's MCMs.
GeodesicModel fit(const std::vector<Mat>& mcms, const std::vector<double>& times, int k_e, const PipelineConfig& cfg,
                  FitReport* report) {
  if (2 * k_e > mcms.front().rows())
    throw MethodError("pipeline: geodesic rank k_e needs 2 k_e <= number of embedded nodes");
  return fit_geodesic(mcms, times, k_e, cfg.fit, report);
}

// Clusters U(t_i) for every snapshot at k communities, warm-started and aligned.
PartitionSequence cluster_sequence(const SnapshotSequence& seq, const std::vector<Mat>& embeddings,
                                   const PipelineConfig& cfg, int k, bool temporal) {
  PartitionSequence out;
  for (int i = 0; i < seq.T(); ++i) {
    const Partition* prev = temporal && i > 0 ? &out.steps.back() : nullptr;
    Partition p = cluster_embedding(embeddings[i], seq.snapshots[i], cfg, k, i, prev);
    if (cfg.align && i > 0) p = align_partition(out.steps.back(), p);
    out.steps.push_back(std::move(p));
  }
  return out;
}

std::vector<Mat> geodesic_embeddings(const GeodesicModel& model, const std::vector<double>& times) {
  std::vector<Mat> out;
  for (double t : times) out.push_back(model.evaluate(t));
  return out;
}

std::vector<Mat> static_embeddings(const std::vector<Mat>& mcms, int k_e) {
  std::vector<Mat> out;
  for (const auto& m : mcms) {
    if (k_e > m.rows()) throw MethodError("pipeline: k_e exceeds the number of embedded nodes");
    out.push_back(top_left_singular(m, k_e));
  }
  return out;
}

}  // namespace

void validate(const PipelineConfig& cfg) {
  validate(cfg.method);
  if (cfg.variable) {
    if (cfg.k_min < 1 || cfg.k_min > cfg.k_max) throw InputError("pipeline: need 1 <= k_min <= k_max");
    if (cfg.k_e && *cfg.k_e != cfg.k_max) throw InputError("pipeline: variable mode uses k_e = k_max");
  } else {
    if (cfg.k_c < 1) throw InputError("pipeline: k_c must be positive");
    if (cfg.k_e && *cfg.k_e < 1) throw InputError("pipeline: k_e must be positive");
  }
  if (cfg.gaussian_sigma < 0.0) throw InputError("pipeline: gaussian_sigma must be >= 0");
  if (cfg.fit.max_outer < 0 || cfg.fit.inner_iters < 1 || cfg.fit.init_window < 0) throw InputError("pipeline: bad fit parameters");
  if (cfg.kmeans_restarts < 1) throw InputError("pipeline: kmeans_restarts must be >= 1");
}

int default_embedding_rank(const MethodSpec& spec, int k_c) {
  const bool reduced = spec.method == Method::SMM || spec.method == Method::SRSC ||
                       (spec.method == Method::SPMSC && spec.p >= 1.0);
  return reduced ? std::max(1, k_c - 1) : k_c;
}

bool default_row_normalize(Method m) {
  switch (m) {
    case Method::NSC:
    case Method::CSC:
    case Method::HSC:
    case Method::OSC:
    case Method::SCC_SEND:
    case Method::SCC_RECEIVE:
      return true;
    default:
      return false;
  }
}

std::vector<Mat> build_mcms(const SnapshotSequence& seq, const MethodSpec& spec) {
  validate(spec);
  std::vector<Mat> out;
  out.reserve(seq.snapshots.size());
  for (const auto& g : seq.snapshots) out.push_back(build_mcm(g, spec).matrix);
  return out;
}

std::vector<double> gaussian_filter(const std::vector<double>& x, double sigma) {
  if (sigma <= 0.0 || x.empty()) return x;
  const int n = static_cast<int>(x.size());
  const int radius = static_cast<int>(4.0 * sigma + 0.5);
  std::vector<double> w(2 * radius + 1);
  double total = 0.0;
  for (int j = -radius; j <= radius; ++j) total += w[j + radius] = std::exp(-0.5 * j * j / (sigma * sigma));
  for (double& v : w) v /= total;
  auto reflect = [n](int j) {
    // (d c b a | a b c d | d c b a)
    const int period = 2 * n;
    j %= period;
    if (j < 0) j += period;
    return j < n ? j : period - 1 - j;
  };
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = -radius; j <= radius; ++j) out[i] += w[j + radius] * x[reflect(i + j)];
  return out;
}

Partition align_partition(const Partition& prev, const Partition& curr) {
  const auto aligned = align_labels(prev.labels, curr.labels);
  // old id -> new id
  std::map<int, int> perm;
  for (std::size_t i = 0; i < curr.labels.size(); ++i)
    if (curr.labels[i] >= 0) perm[curr.labels[i]] = aligned[i];
  const int k = curr.k;
  // pack into [0, k): ids already inside stay, the rest take the free slots
  std::vector<bool> used(std::max(k, 0), false);
  for (const auto& [from, to] : perm)
    if (to < k) used[to] = true;
  int slot = 0;
  for (auto& [from, to] : perm) {
    if (to < k) continue;
    while (slot < k && used[slot]) ++slot;
    if (slot >= k) throw MethodError("align_partition: more communities than k");
    used[slot] = true;
    to = slot;
  }
  Partition out = curr;
  for (int& l : out.labels)
    if (l >= 0) l = perm.at(l);
  if (curr.soft()) {
    for (Eigen::Index c = 0; c < curr.membership.cols(); ++c) {
      const auto it = perm.find(static_cast<int>(c));
      if (it != perm.end()) out.membership.col(it->second) = curr.membership.col(c);
    }
    // columns that were never an argmax keep relative order in the leftover slots
    std::vector<bool> taken(k, false);
    for (const auto& [from, to] : perm) taken[to] = true;
    int free_slot = 0;
    for (Eigen::Index c = 0; c < curr.membership.cols(); ++c) {
      if (perm.count(static_cast<int>(c))) continue;
      while (free_slot < k && taken[free_slot]) ++free_slot;
      out.membership.col(free_slot) = curr.membership.col(c);
      taken[free_slot] = true;
    }
  }
  return out;
}

DetectResult detect_fixed_k(const SnapshotSequence& seq, const PipelineConfig& cfg) {
  validate(cfg);
  check_sequence(seq);
  DetectResult res;
  if (seq.T() == 1) {
    res.parts = detect_static(seq, cfg);
    return res;
  }
  const auto mcms = build_mcms(seq, cfg.method);
  const auto times = times_of(seq);
  const int k_e = embedding_rank(cfg, cfg.k_c);
  GeodesicModel model = fit(mcms, times, k_e, cfg, &res.report);
  res.parts = cluster_sequence(seq, geodesic_embeddings(model, times), cfg, cfg.k_c, true);
  res.model = std::move(model);
  return res;
}

PartitionSequence detect_static(const SnapshotSequence& seq, const PipelineConfig& cfg) {
  validate(cfg);
  check_sequence(seq);
  const auto mcms = build_mcms(seq, cfg.method);
  const int k_c = cfg.variable ? cfg.k_max : cfg.k_c;
  return cluster_sequence(seq, static_embeddings(mcms, embedding_rank(cfg, k_c)), cfg, k_c, false);
}

DetectResult detect_variable_k(const SnapshotSequence& seq, const PipelineConfig& cfg) {
  validate(cfg);
  check_sequence(seq);
  const auto mcms = build_mcms(seq, cfg.method);
  const auto times = times_of(seq);
  const int T = seq.T();
  DetectResult res;
  std::vector<Mat> emb;
  if (T == 1) {
    emb = static_embeddings(mcms, cfg.k_max);
  } else {
    GeodesicModel model = fit(mcms, times, cfg.k_max, cfg, &res.report);
    emb = geodesic_embeddings(model, times);
    res.model = std::move(model);
  }
  const int nk = cfg.k_max - cfg.k_min + 1;
  BenefitTable bt;
  bt.k_min = cfg.k_min;
  bt.H.resize(nk, T);
  std::vector<PartitionSequence> per_k;
  for (int r = 0; r < nk; ++r) {
    per_k.push_back(cluster_sequence(seq, emb, cfg, cfg.k_min + r, true));
    for (int i = 0; i < T; ++i) bt.H(r, i) = modularity(seq.snapshots[i], per_k.back().steps[i].labels);
  }
  bt.filtered.resize(nk, T);
  for (int r = 0; r < nk; ++r) {
    std::vector<double> row(T);
    for (int i = 0; i < T; ++i) row[i] = bt.H(r, i);
    const auto f = gaussian_filter(row, cfg.gaussian_sigma);
    for (int i = 0; i < T; ++i) bt.filtered(r, i) = f[i];
  }
  for (int i = 0; i < T; ++i) {
    int best = 0;
    for (int r = 1; r < nk; ++r)
      if (bt.filtered(r, i) > bt.filtered(best, i)) best = r;
    bt.chosen.push_back(cfg.k_min + best);
    Partition p = per_k[best].steps[i];
    if (cfg.align && i > 0) p = align_partition(res.parts.steps.back(), p);
    res.parts.steps.push_back(std::move(p));
  }
  res.benefit = std::move(bt);
  return res;
}

DetectResult detect(const SnapshotSequence& seq, const PipelineConfig& cfg) {
  return cfg.variable ? detect_variable_k(seq, cfg) : detect_fixed_k(seq, cfg);
}

int select_k_by_modularity(const SnapshotSequence& seq, const PipelineConfig& cfg, int k_lo, int k_hi) {
  if (k_lo < 1 || k_lo > k_hi) throw InputError("select_k: need 1 <= k_lo <= k_hi");
  check_sequence(seq);
  const int T = seq.T();
  Mat q(k_hi - k_lo + 1, T);
  for (int k = k_lo; k <= k_hi; ++k) {
    PipelineConfig c = cfg;
    c.variable = false;
    c.k_c = k;
    c.k_e.reset();
    const auto res = detect_fixed_k(seq, c);
    for (int i = 0; i < T; ++i) q(k - k_lo, i) = modularity(seq.snapshots[i], res.parts.steps[i].labels);
  }
  std::vector<int> votes(k_hi - k_lo + 1, 0);
  for (int i = 0; i < T; ++i) {
    Eigen::Index arg = 0;
    q.col(i).maxCoeff(&arg);  // first maximum = smallest k
    ++votes[arg];
  }
  const auto best = std::max_element(votes.begin(), votes.end()) - votes.begin();
  return k_lo + static_cast<int>(best);
}

StructureCheck geodesic_structure_check(const std::vector<Mat>& mcms) {
  const int T = static_cast<int>(mcms.size());
  if (T < 2) throw InputError("geodesic_structure_check: need T >= 2");
  const Eigen::Index d = mcms.front().rows();
  Mat x(d, 2 * T);
  for (int i = 0; i < T; ++i) {
    if (mcms[i].rows() != d) throw InputError("geodesic_structure_check: MCM sizes differ");
    const Mat u = top_left_singular(mcms[i], 1);
    x.col(i) = u.col(0);
    x.col(T + i) = -u.col(0);
  }
  Eigen::BDCSVD<Mat> svd(x, Eigen::ComputeThinU);
  StructureCheck out;
  out.sigma = svd.singularValues();
  const Eigen::Index r = std::min<Eigen::Index>(2, svd.matrixU().cols());
  out.proj = Mat::Zero(2 * T, 2);
  out.proj.leftCols(r) = (svd.matrixU().leftCols(r).transpose() * x).transpose();
  return out;
}

}  // namespace geodcd
