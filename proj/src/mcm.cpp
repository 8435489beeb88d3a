#include "geodcd/mcm.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "geodcd/error.hpp"

namespace geodcd {

namespace {

struct MethodInfo {
  Method method;
  std::string_view name;
  Modality modality;
};

constexpr std::array<MethodInfo, 16> kMethods{{
    {Method::USC, "USC", Modality::simple},
    {Method::NSC, "NSC", Modality::simple},
    {Method::SMM, "SMM", Modality::simple},
    {Method::BHC, "BHC", Modality::simple},
    {Method::SRSC, "SRSC", Modality::signed_},
    {Method::GMSC, "GMSC", Modality::signed_},
    {Method::SPMSC, "SPMSC", Modality::signed_},
    {Method::OSC, "OSC", Modality::overlapping},
    {Method::CSC, "CSC", Modality::overlapping},
    {Method::HSC, "HSC", Modality::hierarchical},
    {Method::DDSC, "DDSC", Modality::directed},
    {Method::BSC, "BSC", Modality::directed},
    {Method::RWSC, "RWSC", Modality::directed},
    {Method::PMLSC, "PMLSC", Modality::multiview},
    {Method::SCC_SEND, "SCC-send", Modality::cocluster},
    {Method::SCC_RECEIVE, "SCC-receive", Modality::cocluster},
}};

const MethodInfo& info(Method m) {
  for (const auto& i : kMethods)
    if (i.method == m) return i;
  throw MethodError("unknown method");
}

// D^{-1/2} with zero degrees mapped to zero (pseudo-inverse).
Vec inv_sqrt(const Vec& deg) {
  Vec out(deg.size());
  for (Eigen::Index i = 0; i < deg.size(); ++i) out[i] = deg[i] > 0.0 ? 1.0 / std::sqrt(deg[i]) : 0.0;
  return out;
}

Vec inv(const Vec& deg) {
  Vec out(deg.size());
  for (Eigen::Index i = 0; i < deg.size(); ++i) out[i] = deg[i] > 0.0 ? 1.0 / deg[i] : 0.0;
  return out;
}

double mean_degree(const Mat& a) { return a.rows() == 0 ? 0.0 : a.cwiseAbs().sum() / a.rows(); }

void require_undirected(const GraphSnapshot& g, std::string_view what) {
  if (g.directed)
    throw MethodError("method/modality mismatch: " + std::string(what) + " needs an undirected graph");
}

void require_positive_degrees(const Vec& deg, std::string_view what) {
  for (Eigen::Index i = 0; i < deg.size(); ++i)
    if (!(deg[i] > 0.0))
      throw MethodError(std::string(what) + ": zero-degree node " + std::to_string(i) +
                        " (enable degree regularization or bridge the graph)");
}

Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

}  // namespace

std::string_view method_name(Method m) { return info(m).name; }

Method method_from_name(std::string_view name) {
  for (const auto& i : kMethods)
    if (i.name == name) return i.method;
  if (name == "SCC") return Method::SCC_SEND;
  throw InputError("unknown method '" + std::string(name) + "'");
}

Modality method_modality(Method m) { return info(m).modality; }

void validate(const MethodSpec& spec) {
  const bool power = spec.method == Method::SPMSC || spec.method == Method::PMLSC;
  if (!power && spec.p != 1.0) throw InputError("method spec: p only applies to SPMSC/PMLSC");
  if (power && spec.p == 0.0) throw InputError("method spec: p = 0 is GMSC");
  if (spec.epsilon < 0.0) throw InputError("method spec: epsilon must be >= 0");
  if (spec.tau && *spec.tau < 0.0) throw InputError("method spec: tau must be >= 0");
  if (spec.fuzzifier <= 1.0) throw InputError("method spec: fuzzifier must be > 1");
  if (spec.p_thresh < 0.0 || spec.p_thresh > 1.0) throw InputError("method spec: p_thresh outside [0, 1]");
}

Mcm mcm_generic(const Mat& r, bool leading) {
  if (r.rows() != r.cols() || !is_symmetric(r, 1e-10)) throw MethodError("mcm_generic: R must be symmetric");
  const double nf = r.norm();
  if (!(nf > 0.0)) throw MethodError("mcm_generic: ||R||_F = 0");
  Mcm out;
  const Mat scaled = symmetrize(r) / nf;
  out.matrix = Mat::Identity(r.rows(), r.cols()) + (leading ? scaled : Mat(-scaled));
  return out;
}

Mat laplacian(const Mat& a) {
  Mat l = -a;
  l.diagonal() += degrees(a);
  return l;
}

Mat normalized_laplacian(const Mat& a, double tau) {
  const Vec s = inv_sqrt(degrees(a).array() + tau);
  Mat l = -(s.asDiagonal() * a * s.asDiagonal());
  l.diagonal().array() += 1.0;
  return l;
}

Mat signless_normalized(const Mat& a, double tau) {
  const Vec deg = degrees(a).array() + tau;
  const Vec s = inv_sqrt(deg);
  Mat q = s.asDiagonal() * a * s.asDiagonal();
  for (Eigen::Index i = 0; i < q.rows(); ++i) q(i, i) += deg[i] > 0.0 ? 1.0 : 0.0;
  return q;
}

Mat modularity_matrix(const Mat& a) {
  const Vec deg = degrees(a);
  const double vol = deg.sum();
  if (!(vol > 0.0)) throw MethodError("modularity matrix: empty edge set");
  return a - deg * deg.transpose() / vol;
}

Mat bethe_hessian(const Mat& a, double r) {
  Mat h = -r * a;
  h.diagonal() += degrees(a);
  h.diagonal().array() += r * r - 1.0;
  return h;
}

Mat signed_ratio_laplacian(const Mat& a) {
  Mat l = -a;
  l.diagonal() += a.cwiseAbs().rowwise().sum();
  return l;
}

Mat degree_discounted(const Mat& a, double tau) {
  const Vec so = inv_sqrt(a.rowwise().sum().array() + tau);
  const Vec si = inv_sqrt(a.colwise().sum().transpose().array() + tau);
  const Mat x = so.asDiagonal() * a * si.asDiagonal();  // D_out^{-1/2} A D_in^{-1/2}
  const Mat left = x * (a.transpose() * so.asDiagonal());
  const Mat right = (si.asDiagonal() * a.transpose()) * (so.asDiagonal() * a * si.asDiagonal());
  return symmetrize(left + right);
}

Mat rw_laplacian(const Mat& a, double tau) {
  const Vec dout = a.rowwise().sum().array() + tau;
  const Mat p = inv(dout).asDiagonal() * a;
  // Pi = D_out^{-1}
  const Vec pi_half = inv_sqrt(dout);
  const Vec pi_mhalf = dout.cwiseMax(0.0).cwiseSqrt();
  const Mat x = pi_half.asDiagonal() * p * pi_mhalf.asDiagonal();
  return 0.5 * (x + x.transpose());
}

Mcm mcm_usc(const GraphSnapshot& g, std::optional<double> n) {
  require_undirected(g, "USC");
  const Mat a = g.adjacency();
  const Vec deg = degrees(a);
  double shift = 0.0;
  if (n) {
    shift = *n;
  } else {
    if (g.edges().empty()) throw MethodError("USC: empty graph");
    shift = 2.0 * deg.maxCoeff();
  }
  Mcm out;
  out.method = Method::USC;
  out.matrix = -laplacian(a);
  out.matrix.diagonal().array() += shift;
  return out;
}

Mcm mcm_nsc(const GraphSnapshot& g, bool regularize) {
  require_undirected(g, "NSC");
  const Mat a = g.adjacency();
  double tau = 0.0;
  if (regularize) {
    tau = mean_degree(a);
  } else {
    require_positive_degrees(degrees(a), "NSC");
  }
  Mcm out;
  out.method = Method::NSC;
  out.matrix = symmetrize(signless_normalized(a, tau));
  return out;
}

Mcm mcm_smm(const GraphSnapshot& g) {
  require_undirected(g, "SMM");
  if (g.edges().empty()) throw MethodError("SMM: empty edge set");
  Mcm out = mcm_generic(modularity_matrix(g.adjacency()), true);
  out.method = Method::SMM;
  return out;
}

Mcm mcm_bhc(const GraphSnapshot& g, std::optional<double> r) {
  require_undirected(g, "BHC");
  const Mat a = g.adjacency();
  const double rr = r ? *r : std::sqrt(mean_degree(a));
  Mcm out = mcm_generic(bethe_hessian(a, rr), false);
  out.method = Method::BHC;
  return out;
}

Mcm mcm_signed(const GraphSnapshot& g, const MethodSpec& spec) {
  require_undirected(g, "signed methods");
  const Mat a = g.adjacency();
  Mcm out;
  out.method = spec.method;
  if (spec.method == Method::SRSC) {
    out = mcm_generic(signed_ratio_laplacian(a), false);
    out.method = Method::SRSC;
    return out;
  }
  const Mat lpos = normalized_laplacian(positive_part(a));
  const Mat qneg = signless_normalized(negative_part(a));
  const double floor = std::max(spec.epsilon, 1e-12);
  Mat mean;
  if (spec.method == Method::GMSC) {
    const double eps = std::max(1e-6 * lpos.trace() / static_cast<double>(a.rows()), 1e-12);
    mean = geometric_mean(lpos, qneg, eps);
  } else if (spec.method == Method::SPMSC) {
    if (spec.p < 0.0 && spec.epsilon == 0.0)
      throw MethodError("SPMSC: p < 0 needs epsilon > 0 for singular Laplacians");
    mean = power_mean({lpos, qneg}, spec.p, floor);
  } else {
    throw MethodError("mcm_signed: not a signed method");
  }
  out.matrix = Mat::Identity(a.rows(), a.cols()) - 0.5 * symmetrize(mean);
  return out;
}

Mcm mcm_directed(const GraphSnapshot& g, const MethodSpec& spec) {
  if (!g.directed) throw MethodError("method/modality mismatch: directed method on an undirected graph");
  const Mat a = g.adjacency();
  Mcm out;
  if (spec.method == Method::BSC) {
    out = mcm_generic(symmetrize(a * a.transpose() + a.transpose() * a), true);
  } else if (spec.method == Method::DDSC || spec.method == Method::RWSC) {
    const Vec dout = a.rowwise().sum();
    const Vec din = a.colwise().sum().transpose();
    double tau = 0.0;
    if (spec.regularize_degrees) {
      tau = spec.tau ? *spec.tau : mean_degree(a);
    } else {
      require_positive_degrees(dout, method_name(spec.method));
      if (spec.method == Method::DDSC) require_positive_degrees(din, "DDSC");
    }
    out = mcm_generic(spec.method == Method::DDSC ? degree_discounted(a, tau) : rw_laplacian(a, tau), true);
  } else {
    throw MethodError("mcm_directed: not a directed method");
  }
  out.method = spec.method;
  return out;
}

Mcm mcm_multiview(const GraphSnapshot& g, const MethodSpec& spec) {
  require_undirected(g, "PMLSC");
  std::vector<Mat> laps;
  for (int s = 0; s < g.view_count(); ++s) laps.push_back(normalized_laplacian(g.adjacency(s)));
  const double floor = std::max(spec.epsilon, 1e-12);
  Mat mean = laps.size() == 1 ? laps.front() : power_mean(laps, spec.p, floor);
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(mean));
  const Vec lam = es.eigenvalues().cwiseMax(0.0).cwiseMin(2.0);
  mean = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  Mcm out;
  out.method = Method::PMLSC;
  out.matrix = Mat::Identity(g.d, g.d) - 0.5 * mean;
  return out;
}

std::pair<Mcm, Mcm> mcm_coclustering(const GraphSnapshot& g, const MethodSpec& spec) {
  if (!g.directed && !g.bipartite_split)
    throw MethodError("method/modality mismatch: SCC needs a directed or bipartite graph");
  Mat a = g.adjacency();
  if (g.bipartite_split) {
    const auto [n1, n2] = *g.bipartite_split;
    // undirected bipartite storage: take the V1 -> V2 block
    a = Mat(a.block(0, n1, n1, n2));
  }
  const Vec dr = a.rowwise().sum();
  const Vec dc = a.colwise().sum().transpose();
  const double tau_r = spec.tau ? *spec.tau : (dr.size() ? dr.mean() : 0.0);
  const double tau_c = spec.tau ? *spec.tau : (dc.size() ? dc.mean() : 0.0);
  const Vec sr = inv_sqrt(dr.array() + tau_r);
  const Vec sc = inv_sqrt(dc.array() + tau_c);
  Mat l = sr.asDiagonal() * a * sc.asDiagonal();
  Mcm send, receive;
  send.method = Method::SCC_SEND;
  receive.method = Method::SCC_RECEIVE;
  receive.matrix = l.transpose();
  send.matrix = std::move(l);
  return {std::move(send), std::move(receive)};
}

Mcm mcm_osc(const GraphSnapshot& g) {
  require_undirected(g, "OSC");
  Mcm out = mcm_generic(g.adjacency(), true);
  out.method = Method::OSC;
  return out;
}

Mat overlap_embedding(const Mat& a, const Mat& u) {
  return u * sqrt_psd(symmetrize(u.transpose() * a * u));
}

Mat mcm_overlap(const GraphSnapshot& g, int k) {
  if (k > g.d) throw MethodError("mcm_overlap: k > d");
  const EigenPairs ep = sym_eig(g.adjacency());
  Mat x = ep.vectors.leftCols(k);
  for (int j = 0; j < k; ++j) x.col(j) *= std::sqrt(std::max(ep.values[j], 0.0));
  return x;
}

Mcm build_mcm(const GraphSnapshot& g, const MethodSpec& spec) {
  switch (spec.method) {
    case Method::USC:
      return mcm_usc(g, spec.usc_shift);
    case Method::NSC:
    case Method::CSC:
    case Method::HSC: {
      Mcm m = mcm_nsc(g, spec.regularize_degrees);
      m.method = spec.method;
      return m;
    }
    case Method::SMM:
      return mcm_smm(g);
    case Method::BHC:
      return mcm_bhc(g, spec.r);
    case Method::SRSC:
    case Method::GMSC:
    case Method::SPMSC:
      return mcm_signed(g, spec);
    case Method::OSC:
      return mcm_osc(g);
    case Method::DDSC:
    case Method::BSC:
    case Method::RWSC:
      return mcm_directed(g, spec);
    case Method::PMLSC:
      return mcm_multiview(g, spec);
    case Method::SCC_SEND:
      return mcm_coclustering(g, spec).first;
    case Method::SCC_RECEIVE:
      return mcm_coclustering(g, spec).second;
  }
  throw MethodError("build_mcm: unhandled method");
}

}  // namespace geodcd
