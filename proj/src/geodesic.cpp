#include "geodcd/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geodcd/error.hpp"

namespace geodcd {

namespace {

void check_inputs(const std::vector<Mat>& mcms, const std::vector<double>& times, Eigen::Index d) {
  if (mcms.empty()) throw MethodError("geodesic: no snapshots");
  if (mcms.size() != times.size()) throw MethodError("geodesic: mcms and times differ in length");
  for (const auto& m : mcms)
    if (m.rows() != d) throw MethodError("geodesic: MCM row count does not match model dimension");
}

double sq_norm_sum(const std::vector<Mat>& mcms, std::vector<double>* each = nullptr) {
  double s = 0.0;
  for (const auto& m : mcms) {
    const double v = m.squaredNorm();
    if (each) each->push_back(v);
    s += v;
  }
  return s;
}

// Column j of C(t) has cos(theta_j t) in row j and sin(theta_j t) in row k + j.
Mat c_matrix(const Vec& theta, double t) {
  const Eigen::Index k = theta.size();
  Mat c = Mat::Zero(2 * k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    c(j, j) = std::cos(theta[j] * t);
    c(k + j, j) = std::sin(theta[j] * t);
  }
  return c;
}

// Flip negative angles to |theta| together with the matching Y column (and the
// cached panels / Grams); U(t) is unchanged.
void canonicalize(Mat& p, Vec& theta, std::vector<Mat>* panels, std::vector<Mat>* grams) {
  const Eigen::Index k = theta.size();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (theta[j] >= 0.0) continue;
    theta[j] = -theta[j];
    p.col(k + j) *= -1.0;
    if (panels)
      for (auto& n : *panels) n.col(k + j) *= -1.0;
    if (grams)
      for (auto& g : *grams) {
        g.row(k + j) *= -1.0;
        g.col(k + j) *= -1.0;
      }
  }
}

// Unit vector orthogonal to the columns of basis, built from the standard
// basis vector with the largest residual.
Vec complement_vector(const Mat& basis) {
  const Eigen::Index d = basis.rows();
  Vec best = Vec::Zero(d);
  double best_norm = -1.0;
  for (Eigen::Index r = 0; r < d; ++r) {
    Vec e = Vec::Zero(d);
    e[r] = 1.0;
    for (int pass = 0; pass < 2; ++pass) e -= basis * (basis.transpose() * e);
    const double n = e.norm();
    if (n > best_norm) {
      best_norm = n;
      best = e;
    }
  }
  return best / best_norm;
}

}  // namespace

Mat GeodesicModel::C(double t) const { return c_matrix(theta, t); }

Mat GeodesicModel::evaluate(double t) const { return P * c_matrix(theta, t); }

namespace geodesic_detail {

std::vector<Mat> grams(const Mat& p, const std::vector<Mat>& mcms, std::vector<Mat>* panels) {
  std::vector<Mat> out;
  out.reserve(mcms.size());
  if (panels) panels->clear();
  for (const auto& m : mcms) {
    Mat n = gemm_tn(m, p);  // m_i x 2k
    out.push_back(n.transpose() * n);
    if (panels) panels->push_back(std::move(n));
  }
  return out;
}

double objective_from_grams(const std::vector<Mat>& g, const std::vector<double>& sq_norms, const Vec& theta,
                            const std::vector<double>& times) {
  const Eigen::Index k = theta.size();
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double captured = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double c = std::cos(theta[j] * times[i]);
      const double s = std::sin(theta[j] * times[i]);
      captured += c * c * g[i](j, j) + 2.0 * c * s * g[i](j, k + j) + s * s * g[i](k + j, k + j);
    }
    total += sq_norms[i] - captured;
  }
  return total;
}

Vec gradient_from_grams(const std::vector<Mat>& g, const Vec& theta, const std::vector<double>& times) {
  const Eigen::Index k = theta.size();
  Vec grad = Vec::Zero(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double t = times[i];
      const double a = g[i](j, j), gg = g[i](k + j, k + j);
      const double b = 0.5 * (g[i](j, k + j) + g[i](k + j, j));
      const double x = 2.0 * theta[j] * t;
      grad[j] += t * ((a - gg) * std::sin(x) - 2.0 * b * std::cos(x));
    }
  }
  return grad;
}

Vec theta_step(const std::vector<Mat>& g, const Vec& theta, const std::vector<double>& times, int inner_iters) {
  constexpr double pi = std::numbers::pi;
  const Eigen::Index k = theta.size();
  Vec out = theta;
  for (Eigen::Index j = 0; j < k; ++j) {
    double th = theta[j];
    for (int m = 0; m < inner_iters; ++m) {
      double sum_f = 0.0, sum_w = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double t = times[i];
        if (t == 0.0) continue;
        const double a = g[i](j, j), gg = g[i](k + j, k + j);
        const double b = 0.5 * (g[i](j, k + j) + g[i](k + j, j));
        const double half = 0.5 * (a - gg);
        const double amp = std::hypot(half, b);
        if (amp == 0.0) continue;
        const double phi = std::atan2(b, half);
        const double f_dot = 2.0 * t * amp * std::sin(2.0 * th * t - phi);
        // signed distance to the nearest minimizer of this term
        const double period = pi / t;
        double delta = th - phi / (2.0 * t);
        delta -= period * std::floor(delta / period + 0.5);
        const double w = std::abs(delta) > 1e-12 * period ? f_dot / delta : 4.0 * t * t * amp;
        sum_f += f_dot;
        sum_w += w;
      }
      if (!(sum_w > 0.0)) break;
      th -= sum_f / sum_w;
    }
    out[j] = th;
  }
  return out;
}

}  // namespace geodesic_detail

using namespace geodesic_detail;

double objective(const GeodesicModel& model, const std::vector<Mat>& mcms, const std::vector<double>& times) {
  check_inputs(mcms, times, model.P.rows());
  std::vector<double> sq;
  sq_norm_sum(mcms, &sq);
  return objective_from_grams(grams(model.P, mcms), sq, model.theta, times);
}

namespace {

Mat p_step(const std::vector<Mat>& mcms, const std::vector<Mat>& panels, const Vec& theta,
           const std::vector<double>& times) {
  Mat acc = Mat::Zero(mcms.front().rows(), 2 * theta.size());
  for (std::size_t i = 0; i < mcms.size(); ++i) {
    const Mat c = c_matrix(theta, times[i]);
    acc += gemm(mcms[i], panels[i] * (c * c.transpose()));
  }
  if (!(acc.norm() > 0.0)) throw MethodError("p_update: degenerate (all-zero) accumulation");
  return polar_factor(acc);
}

}  // namespace

Mat p_update(const Mat& p_prev, const Vec& theta, const std::vector<Mat>& mcms, const std::vector<double>& times) {
  check_inputs(mcms, times, p_prev.rows());
  if (!(sq_norm_sum(mcms, nullptr) > 0.0)) throw MethodError("p_update: all MCMs are zero");
  std::vector<Mat> panels;
  grams(p_prev, mcms, &panels);
  return p_step(mcms, panels, theta, times);
}

Vec theta_update(const Mat& p, const Vec& theta_prev, const std::vector<Mat>& mcms,
                 const std::vector<double>& times, int inner_iters) {
  check_inputs(mcms, times, p.rows());
  return theta_step(grams(p, mcms), theta_prev, times, inner_iters);
}

Vec theta_gradient(const Mat& p, const Vec& theta, const std::vector<Mat>& mcms, const std::vector<double>& times) {
  check_inputs(mcms, times, p.rows());
  return gradient_from_grams(grams(p, mcms), theta, times);
}

GeodesicModel init_geodesic(const std::vector<Mat>& mcms, int k, int window) {
  if (mcms.empty()) throw MethodError("init_geodesic: no snapshots");
  const Eigen::Index d = mcms.front().rows();
  if (k < 1 || 2 * k > d) throw MethodError("init_geodesic: need 1 <= k and 2k <= d");
  if (window < 0) throw MethodError("init_geodesic: window must be >= 0");
  if (window == 0) window = std::max<int>(1, static_cast<int>(mcms.size()) / 5);
  const auto w = std::min<std::size_t>(static_cast<std::size_t>(window), mcms.size());
  auto pooled = [&](std::size_t first) {
    if (w == 1) return top_left_singular(mcms[first], k);
    Eigen::Index cols = 0;
    for (std::size_t i = first; i < first + w; ++i) cols += mcms[i].cols();
    Mat cat(d, cols);
    Eigen::Index at = 0;
    for (std::size_t i = first; i < first + w; ++i) {
      cat.middleCols(at, mcms[i].cols()) = mcms[i];
      at += mcms[i].cols();
    }
    return top_left_singular(cat, k);
  };
  const Mat h1 = pooled(0);
  const Mat ht = pooled(mcms.size() - w);
  Eigen::JacobiSVD<Mat> svd(h1.transpose() * ht, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat base = h1 * svd.matrixU();
  const Mat target = ht * svd.matrixV();
  const Vec s = svd.singularValues();

  GeodesicModel model;
  model.P.resize(d, 2 * k);
  model.P.leftCols(k) = base;
  model.theta.resize(k);
  Mat y = target - base * (base.transpose() * target);
  for (int j = 0; j < k; ++j) {
    model.theta[j] = std::acos(std::clamp(s[j], -1.0, 1.0));
    // re-orthogonalize against what is already placed
    Vec col = y.col(j);
    const Mat placed = model.P.leftCols(k + j);
    col -= placed * (placed.transpose() * col);
    const double n = col.norm();
    if (n > 1e-10) {
      col /= n;
      col -= placed * (placed.transpose() * col);
      col.normalize();
    } else {
      col = complement_vector(placed);
      model.theta[j] = n > 0.0 ? model.theta[j] : 0.0;
    }
    model.P.col(k + j) = col;
  }
  return model;
}

GeodesicModel fit_geodesic(const std::vector<Mat>& mcms, const std::vector<double>& times, int k,
                           const FitOptions& opt, FitReport* report) {
  if (mcms.empty()) throw MethodError("fit_geodesic: no snapshots");
  check_inputs(mcms, times, mcms.front().rows());
  std::vector<double> sq;
  const double total = sq_norm_sum(mcms, &sq);
  if (!(total > 0.0)) throw MethodError("fit_geodesic: all MCMs are zero");
  GeodesicModel model = init_geodesic(mcms, k, opt.init_window);
  std::vector<Mat> panels;
  std::vector<Mat> g = grams(model.P, mcms, &panels);
  double obj = objective_from_grams(g, sq, model.theta, times);

  FitReport rep;
  rep.objective_trace.push_back(obj);
  for (int it = 0; it < opt.max_outer; ++it) {
    if (obj <= 1e-15 * total) {
      rep.converged = true;
      break;
    }
    model.P = p_step(mcms, panels, model.theta, times);
    g = grams(model.P, mcms, &panels);
    model.theta = theta_step(g, model.theta, times, opt.inner_iters);
    canonicalize(model.P, model.theta, &panels, &g);
    const double next = objective_from_grams(g, sq, model.theta, times);
    rep.objective_trace.push_back(next);
    rep.iterations = it + 1;
    const double rel = (obj - next) / std::max(std::abs(obj), 1e-300);
    obj = next;
    if (rel < opt.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.final_objective = obj;
  if (report) *report = std::move(rep);
  return model;
}

}  // namespace geodcd
