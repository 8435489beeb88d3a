#pragma once

// Grassmann geodesic U(t) = P [cos(Theta t); sin(Theta t)] fitted to a
// sequence of MCMs by block coordinate descent on
//   L = sum_i ||M_i - U(t_i) U(t_i)^T M_i||_F^2.
//
// Everything after the first pass only needs the 2k x 2k Gram matrices
// G_i = P^T M_i M_i^T P, so the Theta steps are O(T k) and an outer iteration
// costs two d x d x 2k panel products per snapshot.

#include <vector>

#include "geodcd/linalg.hpp"

namespace geodcd {

struct GeodesicModel {
  Mat P;      // d x 2k, [H Y], orthonormal columns
  Vec theta;  // k angles, >= 0

  int k() const { return static_cast<int>(theta.size()); }
  int d() const { return static_cast<int>(P.rows()); }
  Mat C(double t) const;         // 2k x k
  Mat evaluate(double t) const;  // d x k
};

struct FitOptions {
  int max_outer = 100;
  double tol = 1e-8;  // relative objective decrease
  int inner_iters = 5;
  int init_window = 0;  // snapshots pooled at each end for H_1, H_T; 0 = max(1, T/5)
};

struct FitReport {
  std::vector<double> objective_trace;  // index 0 = initialization
  int iterations = 0;
  bool converged = false;
  double final_objective = 0.0;
};

// M_i may be rectangular (d x m_i); all share d rows.
double objective(const GeodesicModel& model, const std::vector<Mat>& mcms, const std::vector<double>& times);

Mat p_update(const Mat& p_prev, const Vec& theta, const std::vector<Mat>& mcms, const std::vector<double>& times);

Vec theta_update(const Mat& p, const Vec& theta_prev, const std::vector<Mat>& mcms,
                 const std::vector<double>& times, int inner_iters);

// d/dtheta_j of the objective at fixed P: sum_i f_dot_{i,j}(theta_j).
Vec theta_gradient(const Mat& p, const Vec& theta, const std::vector<Mat>& mcms, const std::vector<double>& times);

// window > 1 pools the first / last `window` MCMs for the endpoint subspaces,
// 0 picks max(1, T/5).
GeodesicModel init_geodesic(const std::vector<Mat>& mcms, int k, int window = 1);

GeodesicModel fit_geodesic(const std::vector<Mat>& mcms, const std::vector<double>& times, int k,
                           const FitOptions& opt = {}, FitReport* report = nullptr);

// Building blocks on the Gram form, shared with the fit loop and tests.
namespace geodesic_detail {

// G_i = P^T M_i M_i^T P for every snapshot; the N_i = M_i^T P panels are
// returned too when requested.
std::vector<Mat> grams(const Mat& p, const std::vector<Mat>& mcms, std::vector<Mat>* panels = nullptr);

// sum_i ||M_i||^2 - tr(C_i^T G_i C_i)
double objective_from_grams(const std::vector<Mat>& g, const std::vector<double>& sq_norms, const Vec& theta,
                            const std::vector<double>& times);

Vec theta_step(const std::vector<Mat>& g, const Vec& theta, const std::vector<double>& times, int inner_iters);

Vec gradient_from_grams(const std::vector<Mat>& g, const Vec& theta, const std::vector<double>& times);

}  // namespace geodesic_detail

}  // namespace geodcd
