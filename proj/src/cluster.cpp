#include "geodcd/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "geodcd/error.hpp"
#include "geodcd/kernels.hpp"
#include "geodcd/rng.hpp"

namespace geodcd {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check(const Mat& emb, int k_c) {
  if (emb.rows() == 0 || emb.cols() == 0) throw MethodError("clustering: empty embedding");
  if (k_c < 1 || k_c > emb.rows()) throw MethodError("clustering: k_c must lie in [1, d]");
  if (!emb.allFinite()) throw MethodError("clustering: non-finite embedding");
}

const double* row_ptr(const RowMat& m, Eigen::Index r) { return m.data() + r * m.cols(); }

// Assign every point to its nearest center; returns inertia.
double assign(const RowMat& pts, const RowMat& centers, std::vector<int>& labels, std::vector<double>& dist,
              bool l1) {
  const auto& kt = kernels::active();
  const auto n = static_cast<std::size_t>(pts.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const double v = l1 ? kt.l1_distance(row_ptr(pts, i), row_ptr(centers, c), n)
                          : kt.squared_distance(row_ptr(pts, i), row_ptr(centers, c), n);
      if (v < best) {
        best = v;
        arg = static_cast<int>(c);
      }
    }
    labels[i] = arg;
    dist[i] = best;
    total += best;
  }
  return total;
}

// Gives each empty cluster the point farthest from its current center.
bool repair_empty(const RowMat& pts, RowMat& centers, std::vector<int>& labels, std::vector<double>& dist) {
  const int k = static_cast<int>(centers.rows());
  std::vector<int> count(k, 0);
  for (int l : labels) ++count[l];
  bool any = false;
  for (int c = 0; c < k; ++c) {
    if (count[c] > 0) continue;
    int far = -1;
    double far_d = -1.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (count[labels[i]] > 1 && dist[i] > far_d) {
        far_d = dist[i];
        far = static_cast<int>(i);
      }
    if (far < 0) continue;
    --count[labels[far]];
    labels[far] = c;
    ++count[c];
    dist[far] = 0.0;
    centers.row(c) = pts.row(far);
    any = true;
  }
  return any;
}

RowMat centers_from_labels(const RowMat& pts, const std::vector<int>& labels, int k, bool median) {
  RowMat centers = RowMat::Zero(k, pts.cols());
  if (!median) {
    std::vector<int> count(k, 0);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      if (labels[i] < 0 || labels[i] >= k) continue;
      centers.row(labels[i]) += pts.row(i);
      ++count[labels[i]];
    }
    for (int c = 0; c < k; ++c)
      if (count[c] > 0) centers.row(c) /= count[c];
    return centers;
  }
  std::vector<std::vector<int>> members(k);
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    if (labels[i] >= 0 && labels[i] < k) members[labels[i]].push_back(static_cast<int>(i));
  std::vector<double> buf;
  for (int c = 0; c < k; ++c) {
    if (members[c].empty()) continue;
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      buf.clear();
      for (int i : members[c]) buf.push_back(pts(i, j));
      const std::size_t mid = buf.size() / 2;
      std::nth_element(buf.begin(), buf.begin() + mid, buf.end());
      double v = buf[mid];
      if (buf.size() % 2 == 0) v = 0.5 * (v + *std::max_element(buf.begin(), buf.begin() + mid));
      centers(c, j) = v;
    }
  }
  return centers;
}

ClusterResult lloyd(const RowMat& pts, RowMat centers, const ClusterOptions& opt, bool median) {
  const int k = static_cast<int>(centers.rows());
  ClusterResult res;
  std::vector<int> labels(pts.rows(), 0);
  std::vector<double> dist(pts.rows(), 0.0);
  double inertia = assign(pts, centers, labels, dist, median);
  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it + 1;
    repair_empty(pts, centers, labels, dist);
    RowMat next = centers_from_labels(pts, labels, k, median);
    // clusters emptied by repair keep their previous center
    std::vector<int> count(k, 0);
    for (int l : labels) ++count[l];
    for (int c = 0; c < k; ++c)
      if (count[c] == 0) next.row(c) = centers.row(c);
    const double move = (next - centers).rowwise().norm().maxCoeff();
    centers = std::move(next);
    inertia = assign(pts, centers, labels, dist, median);
    res.inertia_trace.push_back(inertia);
    if (move <= opt.tol) break;
  }
  repair_empty(pts, centers, labels, dist);
  std::vector<int> count(k, 0);
  for (int l : labels) ++count[l];
  res.has_empty_cluster = std::any_of(count.begin(), count.end(), [](int c) { return c == 0; });
  res.labels = std::move(labels);
  res.centers = centers;
  res.inertia = inertia;
  return res;
}

RowMat seed_centers(const RowMat& pts, const std::vector<int>& idx) {
  RowMat c(idx.size(), pts.cols());
  for (std::size_t j = 0; j < idx.size(); ++j) c.row(j) = pts.row(idx[j]);
  return c;
}

}  // namespace

std::vector<int> furthest_point_seeds(const Mat& emb, int k_c, std::uint64_t seed) {
  check(emb, k_c);
  const RowMat pts = emb;
  const auto& kt = kernels::active();
  const auto n = static_cast<std::size_t>(pts.cols());
  Philox rng(seed, 0x5EED);
  std::vector<int> idx{static_cast<int>(rng.below(static_cast<std::uint32_t>(pts.rows())))};
  std::vector<double> nearest(pts.rows(), std::numeric_limits<double>::infinity());
  while (static_cast<int>(idx.size()) < k_c) {
    const int last = idx.back();
    int arg = -1;
    double best = -1.0;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      nearest[i] = std::min(nearest[i], kt.squared_distance(row_ptr(pts, i), row_ptr(pts, last), n));
      if (nearest[i] > best) {
        best = nearest[i];
        arg = static_cast<int>(i);
      }
    }
    idx.push_back(arg);
  }
  return idx;
}

std::vector<int> kmeanspp_seeds(const Mat& emb, int k_c, std::uint64_t seed) {
  check(emb, k_c);
  const RowMat pts = emb;
  const auto& kt = kernels::active();
  const auto n = static_cast<std::size_t>(pts.cols());
  Philox rng(seed, 0x5EEE);
  std::vector<int> idx{static_cast<int>(rng.below(static_cast<std::uint32_t>(pts.rows())))};
  std::vector<double> nearest(pts.rows(), std::numeric_limits<double>::infinity());
  while (static_cast<int>(idx.size()) < k_c) {
    const int last = idx.back();
    double total = 0.0;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      nearest[i] = std::min(nearest[i], kt.squared_distance(row_ptr(pts, i), row_ptr(pts, last), n));
      total += nearest[i];
    }
    int arg = -1;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        if (nearest[i] <= 0.0) continue;
        arg = static_cast<int>(i);
        u -= nearest[i];
        if (u < 0.0) break;
      }
    }
    if (arg < 0) arg = static_cast<int>(rng.below(static_cast<std::uint32_t>(pts.rows())));
    idx.push_back(arg);
  }
  return idx;
}

ClusterResult kmeans(const Mat& emb, int k_c, std::uint64_t seed, const std::optional<std::vector<int>>& warm_start,
                     const ClusterOptions& opt) {
  check(emb, k_c);
  const RowMat pts = emb;
  if (warm_start) {
    if (static_cast<Eigen::Index>(warm_start->size()) != pts.rows())
      throw MethodError("kmeans: warm start has the wrong length");
    RowMat centers = centers_from_labels(pts, *warm_start, k_c, false);
    // clusters absent from the warm start are seeded furthest-first
    std::vector<int> count(k_c, 0);
    for (int l : *warm_start)
      if (l >= 0 && l < k_c) ++count[l];
    const auto& kt = kernels::active();
    const auto n = static_cast<std::size_t>(pts.cols());
    std::vector<int> have;
    for (int c = 0; c < k_c; ++c)
      if (count[c] > 0) have.push_back(c);
    if (have.empty()) return kmeans(emb, k_c, seed, std::nullopt, opt);
    for (int c = 0; c < k_c; ++c) {
      if (count[c] > 0) continue;
      int arg = 0;
      double best = -1.0;
      for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        double dmin = std::numeric_limits<double>::infinity();
        for (int h : have) dmin = std::min(dmin, kt.squared_distance(row_ptr(pts, i), row_ptr(centers, h), n));
        if (dmin > best) {
          best = dmin;
          arg = static_cast<int>(i);
        }
      }
      centers.row(c) = pts.row(arg);
      have.push_back(c);
    }
    ClusterResult warm = lloyd(pts, std::move(centers), opt, false);
    if (opt.restarts <= 1) return warm;
    // cold restarts compete; the warm run keeps ties
    ClusterOptions cold = opt;
    cold.restarts = opt.restarts - 1;
    ClusterResult other = kmeans(emb, k_c, seed, std::nullopt, cold);
    return other.inertia < warm.inertia * (1.0 - 1e-9) ? other : warm;
  }
  ClusterResult best;
  bool first = true;
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    const std::uint64_t rs = seed + static_cast<std::uint64_t>(r) * 0x9E3779B97F4A7C15ull;
    const auto idx = r == 0 ? furthest_point_seeds(emb, k_c, rs) : kmeanspp_seeds(emb, k_c, rs);
    ClusterResult res = lloyd(pts, seed_centers(pts, idx), opt, false);
    if (first || res.inertia < best.inertia - 1e-12) {
      best = std::move(res);
      first = false;
    }
  }
  return best;
}

ClusterResult sign_split(const Mat& emb) {
  if (emb.cols() != 1) throw MethodError("sign_split: embedding must have k = 1");
  if (emb.rows() == 0) throw MethodError("clustering: empty embedding");
  ClusterResult res;
  res.labels.resize(emb.rows());
  int pos = 0;
  for (Eigen::Index i = 0; i < emb.rows(); ++i) {
    res.labels[i] = emb(i, 0) >= 0.0 ? 0 : 1;
    pos += res.labels[i] == 0;
  }
  res.has_empty_cluster = pos == 0 || pos == emb.rows();
  res.centers = Mat::Zero(2, 1);
  std::array<int, 2> count{0, 0};
  for (Eigen::Index i = 0; i < emb.rows(); ++i) {
    res.centers(res.labels[i], 0) += emb(i, 0);
    ++count[res.labels[i]];
  }
  for (int c = 0; c < 2; ++c)
    if (count[c]) res.centers(c, 0) /= count[c];
  for (Eigen::Index i = 0; i < emb.rows(); ++i) {
    const double v = emb(i, 0) - res.centers(res.labels[i], 0);
    res.inertia += v * v;
  }
  return res;
}

ClusterResult kmedians(const Mat& emb, int k_c, std::uint64_t seed, const ClusterOptions& opt) {
  check(emb, k_c);
  const RowMat pts = emb;
  const auto idx = furthest_point_seeds(emb, k_c, seed);
  return lloyd(pts, seed_centers(pts, idx), opt, true);
}

ClusterResult fuzzy_cmeans(const Mat& emb, int k_c, double m, std::uint64_t seed,
                           const std::optional<std::vector<int>>& warm_start, const ClusterOptions& opt) {
  check(emb, k_c);
  if (!(m > 1.0)) throw MethodError("fuzzy_cmeans: fuzzifier must be > 1");
  const RowMat pts = emb;
  const Eigen::Index d = pts.rows();
  const auto& kt = kernels::active();
  const auto n = static_cast<std::size_t>(pts.cols());
  RowMat centers;
  if (warm_start) {
    centers = kmeans(emb, k_c, seed, warm_start, opt).centers;
  } else {
    centers = seed_centers(pts, furthest_point_seeds(emb, k_c, seed));
  }
  Mat u(d, k_c);
  const double expo = 1.0 / (m - 1.0);
  auto update_memberships = [&] {
    for (Eigen::Index i = 0; i < d; ++i) {
      std::vector<double> dist(k_c);
      int zero = -1;
      for (int c = 0; c < k_c; ++c) {
        dist[c] = kt.squared_distance(row_ptr(pts, i), row_ptr(centers, c), n);
        if (dist[c] <= 1e-300 && zero < 0) zero = c;
      }
      if (zero >= 0) {
        u.row(i).setZero();
        u(i, zero) = 1.0;
        continue;
      }
      // u_ic = 1 / sum_j (d_ic / d_ij)^(1/(m-1)), with squared distances
      for (int c = 0; c < k_c; ++c) {
        double s = 0.0;
        for (int j = 0; j < k_c; ++j) s += std::pow(dist[c] / dist[j], expo);
        u(i, c) = 1.0 / s;
      }
      u.row(i) /= u.row(i).sum();
    }
  };
  ClusterResult res;
  update_memberships();
  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it + 1;
    RowMat next = RowMat::Zero(k_c, pts.cols());
    for (int c = 0; c < k_c; ++c) {
      double wsum = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) {
        const double w = std::pow(u(i, c), m);
        next.row(c) += w * pts.row(i);
        wsum += w;
      }
      if (wsum > 0.0) next.row(c) /= wsum;
    }
    const double move = (next - centers).rowwise().norm().maxCoeff();
    centers = std::move(next);
    update_memberships();
    if (move <= opt.tol) break;
  }
  res.memberships = u;
  res.centers = centers;
  res.labels.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::Index arg = 0;
    u.row(i).maxCoeff(&arg);
    res.labels[i] = static_cast<int>(arg);
    for (int c = 0; c < k_c; ++c)
      res.inertia += std::pow(u(i, c), m) * kt.squared_distance(row_ptr(pts, i), row_ptr(centers, c), n);
  }
  return res;
}

Mat soft_membership_from_centers(const Mat& emb, const Mat& centers) {
  // rows x = c^T beta  ->  beta = (C C^T)^{-1} C x
  const Mat cct = centers * centers.transpose();
  Eigen::LDLT<Mat> ldlt(cct);
  Eigen::JacobiSVD<Mat> svd(centers);
  const Vec sv = svd.singularValues();
  if (sv.size() == 0 || sv[sv.size() - 1] <= 1e-12 * std::max(1.0, sv[0]))
    throw MethodError("soft_membership_from_centers: rank-deficient centers");
  Mat coef = ldlt.solve(centers * emb.transpose()).transpose();  // d x k_c
  const Eigen::Index k = centers.rows();
  for (Eigen::Index i = 0; i < coef.rows(); ++i) {
    coef.row(i) = coef.row(i).cwiseMax(0.0);
    const double s = coef.row(i).sum();
    if (s > 0.0) {
      coef.row(i) /= s;
    } else {
      coef.row(i).setConstant(1.0 / static_cast<double>(k));
    }
  }
  return coef;
}

Mat threshold_membership(const Mat& membership, double thresh) {
  Mat out = Mat::Zero(membership.rows(), membership.cols());
  for (Eigen::Index i = 0; i < membership.rows(); ++i) {
    bool any = false;
    for (Eigen::Index c = 0; c < membership.cols(); ++c)
      if (membership(i, c) > thresh) {
        out(i, c) = 1.0;
        any = true;
      }
    if (!any && membership.cols() > 0) {
      Eigen::Index arg = 0;
      membership.row(i).maxCoeff(&arg);
      out(i, arg) = 1.0;
    }
  }
  return out;
}

}  // namespace geodcd
