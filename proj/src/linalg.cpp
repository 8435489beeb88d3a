#include "geodcd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "geodcd/error.hpp"
#include "geodcd/kernels.hpp"

namespace geodcd {

namespace {

kernels::ConstPanel cview(const Mat& m) {
  return {m.data(), static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()),
          static_cast<std::size_t>(std::max<Eigen::Index>(1, m.outerStride()))};
}

kernels::Panel view(Mat& m) {
  return {m.data(), static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()),
          static_cast<std::size_t>(std::max<Eigen::Index>(1, m.outerStride()))};
}

}  // namespace

Mat gemm(const Mat& a, const Mat& x) {
  if (a.cols() != x.rows()) throw MethodError("gemm: inner dimension mismatch");
  Mat out(a.rows(), x.cols());
  if (out.size() == 0) return out;
  if (a.cols() == 0) return Mat::Zero(a.rows(), x.cols());
  kernels::active().gemm_nn(cview(a), cview(x), view(out));
  return out;
}

Mat gemm_tn(const Mat& a, const Mat& x) {
  if (a.rows() != x.rows()) throw MethodError("gemm_tn: inner dimension mismatch");
  Mat out(a.cols(), x.cols());
  if (out.size() == 0) return out;
  if (a.rows() == 0) return Mat::Zero(a.cols(), x.cols());
  kernels::active().gemm_tn(cview(a), cview(x), view(out));
  return out;
}

bool is_symmetric(const Mat& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

EigenPairs sym_eig(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  if (es.info() != Eigen::Success) throw MethodError("symmetric eigensolver failed");
  EigenPairs out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  return out;
}

Mat top_left_singular(const Mat& m, int k) {
  if (k < 0 || k > m.rows()) throw MethodError("top_left_singular: k out of range");
  const Mat s = is_symmetric(m) ? Mat(0.5 * (m + m.transpose())) : Mat(m * m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  if (es.info() != Eigen::Success) throw MethodError("symmetric eigensolver failed");
  const Vec& lam = es.eigenvalues();
  std::vector<int> idx(lam.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return std::abs(lam[a]) > std::abs(lam[b]); });
  Mat out(m.rows(), k);
  for (int j = 0; j < k; ++j) out.col(j) = es.eigenvectors().col(idx[j]);
  return out;
}

Vec singular_values(const Mat& m) {
  Eigen::BDCSVD<Mat> svd(m);
  return svd.singularValues();
}

Mat sym_function(const Mat& a, const std::function<double(double)>& f) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
  if (es.info() != Eigen::Success) throw MethodError("symmetric eigensolver failed");
  Vec lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam[i] = f(lam[i]);
  const Mat& v = es.eigenvectors();
  return v * lam.asDiagonal() * v.transpose();
}

Mat sym_power(const Mat& a, double p, double floor) {
  return sym_function(a, [&](double x) { return std::pow(std::max(x, floor), p); });
}

Mat sqrt_psd(const Mat& a) {
  return sym_function(a, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

Mat power_mean(const std::vector<Mat>& mats, double p, double floor) {
  if (mats.empty()) throw MethodError("power_mean: no matrices");
  if (p == 0.0) throw MethodError("power_mean: p = 0 is the geometric mean");
  const Eigen::Index n = mats.front().rows();
  Mat acc = Mat::Zero(n, n);
  if (p > 0.0) floor = 0.0;
  for (const auto& m : mats) {
    if (m.rows() != n || m.cols() != n) throw MethodError("power_mean: inconsistent shapes");
    acc += p == 1.0 ? Mat(0.5 * (m + m.transpose())) : sym_power(m, p, floor);
  }
  acc /= static_cast<double>(mats.size());
  if (p == 1.0) return acc;
  return sym_power(acc, 1.0 / p, floor);
}

Mat geometric_mean(const Mat& a, const Mat& b, double floor) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
  if (es.info() != Eigen::Success) throw MethodError("symmetric eigensolver failed");
  const Vec lam = es.eigenvalues().cwiseMax(floor);
  const Mat& v = es.eigenvectors();
  const Mat half = v * lam.cwiseSqrt().asDiagonal() * v.transpose();
  const Mat inv_half = v * lam.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  const Mat inner = inv_half * b * inv_half;
  return half * sqrt_psd(inner) * half;
}

Mat polar_factor(const Mat& g) {
  Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

Mat orthonormalize(const Mat& a) {
  Eigen::HouseholderQR<Mat> qr(a);
  return qr.householderQ() * Mat::Identity(a.rows(), a.cols());
}

Vec principal_angles(const Mat& u, const Mat& v) {
  Eigen::JacobiSVD<Mat> svd(u.transpose() * v);
  Vec s = svd.singularValues();
  Vec ang(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) ang[i] = std::acos(std::clamp(s[i], -1.0, 1.0));
  // singular values descend, so angles ascend
  return ang;
}

double subspace_distance(const Mat& u, const Mat& v) {
  // sin-based form stays accurate for tiny angles where acos loses digits
  const Mat proj = v - u * (u.transpose() * v);
  const Vec s = singular_values(proj);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double a = std::asin(std::clamp(s[i], 0.0, 1.0));
    acc += a * a;
  }
  return std::sqrt(acc);
}

Mat normalize_rows(const Mat& x) {
  Mat out = x;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double n = out.row(i).norm();
    if (n > 0.0) out.row(i) /= n;
  }
  return out;
}

}  // namespace geodcd
