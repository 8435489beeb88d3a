#include "geodcd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "geodcd/cluster.hpp"
#include "geodcd/error.hpp"

namespace geodcd {

namespace {

// Dense relabeling to 0..n-1 in order of first appearance.
std::vector<int> compress(const std::vector<int>& v, int* count) {
  std::map<int, int> ids;
  std::vector<int> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto [it, fresh] = ids.emplace(v[i], static_cast<int>(ids.size()));
    (void)fresh;
    out[i] = it->second;
  }
  *count = static_cast<int>(ids.size());
  return out;
}

double entropy(const std::vector<double>& counts, double n) {
  double h = 0.0;
  for (double c : counts)
    if (c > 0) h -= (c / n) * std::log(c / n);
  return h;
}

// E[MI] under the hypergeometric (permutation) model.
double expected_mi(const std::vector<double>& a, const std::vector<double>& b, int n) {
  const double nn = n;
  const double lg_n = std::lgamma(nn + 1.0);
  double emi = 0.0;
  for (double ai : a) {
    for (double bj : b) {
      const int lo = std::max(1, static_cast<int>(ai + bj) - n);
      const int hi = static_cast<int>(std::min(ai, bj));
      const double base = std::lgamma(ai + 1) + std::lgamma(bj + 1) + std::lgamma(nn - ai + 1) +
                          std::lgamma(nn - bj + 1) - lg_n;
      for (int nij = lo; nij <= hi; ++nij) {
        const double x = nij;
        const double term = (x / nn) * std::log(nn * x / (ai * bj));
        const double lp = base - std::lgamma(x + 1) - std::lgamma(ai - x + 1) - std::lgamma(bj - x + 1) -
                          std::lgamma(nn - ai - bj + x + 1);
        emi += term * std::exp(lp);
      }
    }
  }
  return emi;
}

Mat row_normalized(const Mat& b) {
  Mat out = b;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double s = out.row(i).sum();
    if (s > 0) out.row(i) /= s;
  }
  return out;
}

Mat col_normalized(const Mat& b) {
  Mat out = b;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double s = out.col(j).sum();
    if (s > 0) out.col(j) /= s;
  }
  return out;
}

// (1 - alpha)(I - alpha R C^T)^{-1} = (1 - alpha)[I + alpha R (I - alpha C^T R)^{-1} C^T]
Mat affinity(const Mat& b, double alpha) {
  const Mat r = row_normalized(b);
  const Mat c = col_normalized(b);
  const Eigen::Index k = b.cols();
  const Mat inner = (Mat::Identity(k, k) - alpha * c.transpose() * r).partialPivLu().solve(c.transpose());
  Mat p = alpha * r * inner;
  p.diagonal().array() += 1.0;
  return (1.0 - alpha) * p;
}

Mat indicator(const std::vector<int>& labels) {
  int k = 0;
  const auto lab = compress(labels, &k);
  Mat b = Mat::Zero(static_cast<Eigen::Index>(labels.size()), k);
  for (std::size_t i = 0; i < lab.size(); ++i) b(static_cast<Eigen::Index>(i), lab[i]) = 1.0;
  return b;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("ecs: alpha must lie in (0, 1)");
}

}  // namespace

double ami(const std::vector<int>& a_in, const std::vector<int>& b_in) {
  if (a_in.size() != b_in.size()) throw InputError("ami: label vectors differ in length");
  std::vector<int> a, b;
  for (std::size_t i = 0; i < a_in.size(); ++i)
    if (a_in[i] >= 0 && b_in[i] >= 0) {
      a.push_back(a_in[i]);
      b.push_back(b_in[i]);
    }
  if (a.empty()) throw InputError("ami: no labeled elements");
  int ka = 0, kb = 0;
  const auto la = compress(a, &ka);
  const auto lb = compress(b, &kb);
  const int n = static_cast<int>(la.size());
  // identical single-cluster or all-singleton labelings carry no information; treat as perfect agreement
  if ((ka == 1 && kb == 1) || (ka == n && kb == n)) return 1.0;

  Mat cont = Mat::Zero(ka, kb);
  for (int i = 0; i < n; ++i) cont(la[i], lb[i]) += 1.0;
  std::vector<double> ra(ka), cb(kb);
  for (int i = 0; i < ka; ++i) ra[i] = cont.row(i).sum();
  for (int j = 0; j < kb; ++j) cb[j] = cont.col(j).sum();
  const double nn = n;
  double mi = 0.0;
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j)
      if (cont(i, j) > 0) mi += (cont(i, j) / nn) * std::log(nn * cont(i, j) / (ra[i] * cb[j]));
  const double emi = expected_mi(ra, cb, n);
  const double h = std::max(entropy(ra, nn), entropy(cb, nn));
  double denom = h - emi;
  const double eps = std::numeric_limits<double>::epsilon();
  if (std::abs(denom) < eps) denom = denom < 0 ? -eps : eps;
  return (mi - emi) / denom;
}

double ecs(const std::vector<int>& a_in, const std::vector<int>& b_in, double alpha) {
  if (a_in.size() != b_in.size()) throw InputError("ecs: label vectors differ in length");
  check_alpha(alpha);
  std::vector<int> a, b;
  for (std::size_t i = 0; i < a_in.size(); ++i)
    if (a_in[i] >= 0 && b_in[i] >= 0) {
      a.push_back(a_in[i]);
      b.push_back(b_in[i]);
    }
  if (a.empty()) throw InputError("ecs: no labeled elements");
  int ka = 0, kb = 0;
  const auto la = compress(a, &ka);
  const auto lb = compress(b, &kb);
  std::vector<double> sa(ka, 0.0), sb(kb, 0.0);
  for (int l : la) sa[l] += 1.0;
  for (int l : lb) sb[l] += 1.0;
  // p_i(j) = (1-alpha) [i == j] + alpha / |C(i)| [j in C(i)]
  // Row L1 distance splits into self, the overlap C_a(i) & C_b(i), and the two differences.
  Mat cont = Mat::Zero(ka, kb);
  for (std::size_t i = 0; i < la.size(); ++i) cont(la[i], lb[i]) += 1.0;
  double total = 0.0;
  for (std::size_t i = 0; i < la.size(); ++i) {
    const double na = sa[la[i]], nb = sb[lb[i]], both = cont(la[i], lb[i]);
    const double wa = alpha / na, wb = alpha / nb;
    const double self = std::abs(wa - wb);
    const double shared = (both - 1.0) * std::abs(wa - wb);
    const double only = (na - both) * wa + (nb - both) * wb;
    total += 1.0 - 0.5 * (self + shared + only);
  }
  return total / static_cast<double>(la.size());
}

double ecs(const Mat& ma, const Mat& mb, double alpha) {
  if (ma.rows() != mb.rows()) throw InputError("ecs: membership matrices differ in node count");
  if (ma.rows() == 0) throw InputError("ecs: empty membership");
  check_alpha(alpha);
  if ((ma.array() < 0).any() || (mb.array() < 0).any()) throw InputError("ecs: negative membership");
  const Mat pa = affinity(ma, alpha);
  const Mat pb = affinity(mb, alpha);
  return 1.0 - 0.5 * (pa - pb).cwiseAbs().rowwise().sum().mean();
}

double modularity(const Mat& a_in, const std::vector<int>& labels) {
  if (a_in.rows() != static_cast<Eigen::Index>(labels.size())) throw InputError("modularity: label length mismatch");
  const Mat a = 0.5 * (a_in.cwiseAbs() + a_in.cwiseAbs().transpose());
  const double vol = a.sum();
  if (!(vol > 0.0)) throw InputError("modularity: empty edge set");
  const Vec deg = a.rowwise().sum();
  // -1 labels act as singletons
  int next = 1 + *std::max_element(labels.begin(), labels.end());
  next = std::max(next, 0);
  std::vector<int> lab(labels);
  for (int& l : lab)
    if (l < 0) l = next++;
  std::vector<double> in(next, 0.0), tot(next, 0.0);
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    tot[lab[j]] += deg[j];
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (lab[i] == lab[j]) in[lab[j]] += a(i, j);
  }
  double q = 0.0;
  for (int c = 0; c < next; ++c) q += in[c] / vol - (tot[c] / vol) * (tot[c] / vol);
  return q;
}

double modularity(const GraphSnapshot& g, const std::vector<int>& labels) {
  Mat a = Mat::Zero(g.d, g.d);
  for (int v = 0; v < g.view_count(); ++v) a += g.adjacency(v).cwiseAbs();
  return modularity(a, labels);
}

std::vector<int> hungarian(const Mat& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw InputError("hungarian: cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  // potentials, 1-based with a virtual column 0
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assign(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) assign[p[j] - 1] = j - 1;
  return assign;
}

std::vector<int> align_labels(const std::vector<int>& prev, const std::vector<int>& curr) {
  if (prev.size() != curr.size()) throw InputError("align_labels: label vectors differ in length");
  std::vector<int> prev_ids, curr_ids;
  for (int l : prev)
    if (l >= 0) prev_ids.push_back(l);
  for (int l : curr)
    if (l >= 0) curr_ids.push_back(l);
  std::sort(prev_ids.begin(), prev_ids.end());
  prev_ids.erase(std::unique(prev_ids.begin(), prev_ids.end()), prev_ids.end());
  std::sort(curr_ids.begin(), curr_ids.end());
  curr_ids.erase(std::unique(curr_ids.begin(), curr_ids.end()), curr_ids.end());
  if (curr_ids.empty()) return curr;

  const int n = static_cast<int>(std::max(prev_ids.size(), curr_ids.size()));
  auto index_of = [](const std::vector<int>& ids, int l) {
    return static_cast<int>(std::lower_bound(ids.begin(), ids.end(), l) - ids.begin());
  };
  Mat overlap = Mat::Zero(n, n);
  for (std::size_t i = 0; i < curr.size(); ++i)
    if (curr[i] >= 0 && prev[i] >= 0) overlap(index_of(curr_ids, curr[i]), index_of(prev_ids, prev[i])) += 1.0;
  const auto match = hungarian(-overlap);

  std::map<int, int> remap;
  int fresh = prev_ids.empty() ? 0 : prev_ids.back() + 1;
  for (std::size_t c = 0; c < curr_ids.size(); ++c) {
    const int p = match[c];
    remap[curr_ids[c]] = p < static_cast<int>(prev_ids.size()) ? prev_ids[p] : fresh++;
  }
  std::vector<int> out(curr.size());
  for (std::size_t i = 0; i < curr.size(); ++i) out[i] = curr[i] < 0 ? curr[i] : remap[curr[i]];
  return out;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double f = pos - static_cast<double>(lo);
  return v[lo] + f * (v[hi] - v[lo]);
}

Summary summarize(const std::vector<double>& v) {
  Summary s;
  if (v.empty()) return s;
  s.median = quantile(v, 0.5);
  s.q25 = quantile(v, 0.25);
  s.q75 = quantile(v, 0.75);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return s;
}

double score_step(const Partition& truth, const Partition& pred, const std::string& metric, double p_thresh) {
  if (truth.size() != pred.size()) throw InputError("score: truth and prediction differ in node count");
  if (metric == "ami") return ami(truth.labels, pred.labels);
  if (metric != "ecs") throw InputError("score: unknown metric '" + metric + "'");
  if (!truth.soft() && !pred.soft()) return ecs(truth.labels, pred.labels);
  // keep nodes labeled in the truth
  std::vector<Eigen::Index> keep;
  for (int i = 0; i < truth.size(); ++i)
    if (truth.labels[i] >= 0) keep.push_back(i);
  auto as_binary = [&](const Partition& p) {
    Mat m = p.soft() ? threshold_membership(p.membership, p_thresh) : indicator(p.labels);
    Mat out(static_cast<Eigen::Index>(keep.size()), m.cols());
    for (std::size_t r = 0; r < keep.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(keep[r]);
    return out;
  };
  return ecs(as_binary(truth), as_binary(pred));
}

}  // namespace geodcd
