#pragma once

// Dense linear algebra helpers on top of Eigen: eigen/singular subspaces,
// matrix functions of symmetric matrices, principal angles. Panel products go
// through the runtime-dispatched kernels.

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace geodcd {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// a * x and a^T * x through kernels::active().
Mat gemm(const Mat& a, const Mat& x);
Mat gemm_tn(const Mat& a, const Mat& x);

bool is_symmetric(const Mat& a, double rel_tol = 1e-12);

struct EigenPairs {
  Vec values;   // descending
  Mat vectors;  // columns match values
};

EigenPairs sym_eig(const Mat& a);

// Leading k left singular vectors (d x k, orthonormal). Symmetric input is
// handled by one symmetric eigensolve ordered by |lambda|; otherwise through
// the eigenvectors of a a^T.
Mat top_left_singular(const Mat& m, int k);

Vec singular_values(const Mat& m);

// V f(Lambda) V^T for symmetric a.
Mat sym_function(const Mat& a, const std::function<double(double)>& f);

// Eigenvalues below floor are raised to floor first.
Mat sym_power(const Mat& a, double p, double floor = 1e-12);
Mat sqrt_psd(const Mat& a);

// ((1/S) sum_s A_s^p)^(1/p) for symmetric PSD A_s; p == 0 is rejected (use
// geometric_mean). Negative p uses the eigenvalue floor.
Mat power_mean(const std::vector<Mat>& mats, double p, double floor = 1e-12);

// A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}.
Mat geometric_mean(const Mat& a, const Mat& b, double floor = 1e-12);

// Nearest matrix with orthonormal columns, W V^T from the thin SVD.
Mat polar_factor(const Mat& g);

Mat orthonormalize(const Mat& a);

// Principal angles between the spans of two orthonormal bases, ascending.
Vec principal_angles(const Mat& u, const Mat& v);
double subspace_distance(const Mat& u, const Mat& v);

Mat normalize_rows(const Mat& x);

}  // namespace geodcd
