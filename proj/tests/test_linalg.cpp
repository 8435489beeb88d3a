#include <doctest.h>

#include <cmath>

#include "geodcd/error.hpp"
#include "geodcd/linalg.hpp"
#include "support.hpp"

using namespace geodcd;

TEST_CASE("sym_eig is descending and reconstructs") {
  Philox rng(10, 0);
  const Mat a = testing::random_symmetric(rng, 9);
  const auto ep = sym_eig(a);
  for (int i = 1; i < 9; ++i) CHECK(ep.values[i - 1] >= ep.values[i]);
  CHECK((ep.vectors * ep.values.asDiagonal() * ep.vectors.transpose() - a).norm() < 1e-10);
}

TEST_CASE("top_left_singular spans the leading subspace") {
  Philox rng(11, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat m = testing::random_matrix(rng, 12, 7);
    const Mat u = top_left_singular(m, 3);
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
    CHECK((u.transpose() * u - Mat::Identity(3, 3)).norm() < 1e-10);
    CHECK(subspace_distance(u, svd.matrixU().leftCols(3)) < 1e-8);
  }
  // symmetric input ordered by |lambda|
  Vec lam(4);
  lam << 3.0, -5.0, 1.0, 0.5;
  const Mat a = lam.asDiagonal();
  const Mat u = top_left_singular(a, 1);
  CHECK(std::abs(u(1, 0)) == doctest::Approx(1.0));
}

TEST_CASE("matrix functions") {
  Philox rng(12, 0);
  const Mat b = testing::random_matrix(rng, 6, 6);
  const Mat a = b * b.transpose() + Mat::Identity(6, 6);
  const Mat r = sqrt_psd(a);
  CHECK((r * r - a).norm() < 1e-9);
  CHECK((sym_power(a, -1.0) * a - Mat::Identity(6, 6)).norm() < 1e-9);
  CHECK((power_mean({a, a}, 3.0) - a).norm() < 1e-9);
  CHECK((power_mean({a, 3.0 * a}, 1.0) - 2.0 * a).norm() < 1e-9);
  CHECK_THROWS(power_mean({a}, 0.0));
  // geometric mean of commuting diagonal matrices
  Vec x(3), y(3);
  x << 1.0, 4.0, 9.0;
  y << 4.0, 1.0, 1.0;
  const Mat g = geometric_mean(x.asDiagonal(), y.asDiagonal());
  CHECK(g(0, 0) == doctest::Approx(2.0));
  CHECK(g(1, 1) == doctest::Approx(2.0));
  CHECK(g(2, 2) == doctest::Approx(3.0));
  const Mat f = sym_function(a, [](double v) { return v * v; });
  CHECK((f - a * a).norm() < 1e-8 * (a * a).norm());
}

TEST_CASE("polar factor and orthonormalize") {
  Philox rng(13, 0);
  const Mat g = testing::random_matrix(rng, 8, 3);
  const Mat q = polar_factor(g);
  CHECK((q.transpose() * q - Mat::Identity(3, 3)).norm() < 1e-10);
  // nearest orthonormal: tr(Q^T G) maximal, beats a random orthonormal frame
  const Mat o = testing::random_orthonormal(rng, 8, 3);
  CHECK((q.transpose() * g).trace() >= (o.transpose() * g).trace());
  const Mat u = orthonormalize(g);
  CHECK((u.transpose() * u - Mat::Identity(3, 3)).norm() < 1e-10);
  CHECK(subspace_distance(u, q) < 1e-8);
}

TEST_CASE("principal angles") {
  Mat e1 = Mat::Zero(2, 1), e2 = Mat::Zero(2, 1), diag(2, 1);
  e1(0, 0) = 1.0;
  e2(1, 0) = 1.0;
  diag << std::sqrt(0.5), std::sqrt(0.5);
  CHECK(principal_angles(e1, e2)[0] == doctest::Approx(M_PI / 2));
  CHECK(principal_angles(e1, diag)[0] == doctest::Approx(M_PI / 4));
  CHECK(subspace_distance(e1, e1) < 1e-12);
}

TEST_CASE("normalize_rows leaves zero rows alone") {
  Mat x(3, 2);
  x << 3.0, 4.0, 0.0, 0.0, -1.0, 0.0;
  const Mat n = normalize_rows(x);
  CHECK(n(0, 0) == doctest::Approx(0.6));
  CHECK(n(1, 0) == 0.0);
  CHECK(n(2, 0) == doctest::Approx(-1.0));
}

TEST_CASE("is_symmetric") {
  Mat a(2, 2);
  a << 1.0, 2.0, 2.0, 1.0;
  CHECK(is_symmetric(a));
  a(0, 1) = 2.1;
  CHECK_FALSE(is_symmetric(a));
}
