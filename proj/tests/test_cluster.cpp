#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "geodcd/cluster.hpp"
#include "geodcd/error.hpp"
#include "support.hpp"

using namespace geodcd;
using namespace geodcd::testing;

namespace {

// n points per cluster around k well separated centers in R^dim.
Mat clouds(Philox& rng, int k, int n, int dim, double spread, std::vector<int>* truth = nullptr) {
  Mat x(k * n, dim);
  if (truth) truth->assign(k * n, 0);
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < dim; ++j) x(c * n + i, j) = (j == c % dim ? 10.0 * (1 + c / dim) : 0.0) + spread * rng.normal();
      if (truth) (*truth)[c * n + i] = c;
    }
  return x;
}

// Same partition up to a relabeling.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> fwd, back;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [f, fi] = fwd.emplace(a[i], b[i]);
    auto [r, ri] = back.emplace(b[i], a[i]);
    if (f->second != b[i] || r->second != a[i]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("kmeans separates clouds") {
  Philox rng(3, 0);
  std::vector<int> truth;
  const Mat x = clouds(rng, 4, 25, 4, 0.3, &truth);
  const auto res = kmeans(x, 4, 11);
  CHECK(same_partition(res.labels, truth));
  CHECK_FALSE(res.has_empty_cluster);
  CHECK(res.centers.rows() == 4);
  CHECK(res.centers.cols() == 4);
}

TEST_CASE("kmeans with one cluster per distinct point has zero inertia") {
  Philox rng(4, 0);
  const Mat x = random_matrix(rng, 7, 3);
  const auto res = kmeans(x, 7, 1);
  CHECK(res.inertia < 1e-20);
  CHECK(std::set<int>(res.labels.begin(), res.labels.end()).size() == 7);
}

TEST_CASE("kmeans is deterministic in the seed") {
  Philox rng(5, 0);
  const Mat x = random_matrix(rng, 60, 3);
  ClusterOptions opt;
  opt.restarts = 4;
  const auto a = kmeans(x, 3, 99, std::nullopt, opt);
  const auto b = kmeans(x, 3, 99, std::nullopt, opt);
  CHECK(a.labels == b.labels);
  CHECK(a.inertia == b.inertia);
  CHECK(a.centers == b.centers);
}

TEST_CASE("kmeans inertia does not increase across Lloyd iterations") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Philox rng(seed, 7);
    const Mat x = random_matrix(rng, 80, 4);
    const auto res = kmeans(x, 5, seed);
    REQUIRE(!res.inertia_trace.empty());
    for (std::size_t i = 1; i < res.inertia_trace.size(); ++i)
      CHECK(res.inertia_trace[i] <= res.inertia_trace[i - 1] * (1 + 1e-12) + 1e-12);
  }
}

TEST_CASE("more restarts never raise the best inertia") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Philox rng(seed, 8);
    const Mat x = random_matrix(rng, 50, 2);
    ClusterOptions one, many;
    many.restarts = 8;
    const double a = kmeans(x, 6, seed, std::nullopt, one).inertia;
    const double b = kmeans(x, 6, seed, std::nullopt, many).inertia;
    CHECK(b <= a * (1 + 1e-12));
  }
}

TEST_CASE("kmeans warm start keeps a converged partition") {
  Philox rng(6, 0);
  std::vector<int> truth;
  const Mat x = clouds(rng, 3, 20, 3, 0.2, &truth);
  const auto res = kmeans(x, 3, 0, truth);
  CHECK(res.labels == truth);
}

TEST_CASE("kmeans partition is invariant under rotation of the embedding") {
  Philox rng(7, 0);
  const Mat x = clouds(rng, 3, 15, 3, 0.5);
  const Mat q = random_orthonormal(rng, 3, 3);
  const auto a = kmeans(x, 3, 2);
  const auto b = kmeans(x * q, 3, 2);
  CHECK(same_partition(a.labels, b.labels));
  CHECK(b.inertia == doctest::Approx(a.inertia).epsilon(1e-9));
}

TEST_CASE("kmeans rejects bad k") {
  Philox rng(8, 0);
  const Mat x = random_matrix(rng, 5, 2);
  CHECK_THROWS_AS(kmeans(x, 0, 0), MethodError);
  CHECK_THROWS_AS(kmeans(x, 6, 0), MethodError);
}

TEST_CASE("seeding returns distinct rows") {
  Philox rng(9, 0);
  const Mat x = random_matrix(rng, 30, 3);
  for (const auto& s : {furthest_point_seeds(x, 6, 1), kmeanspp_seeds(x, 6, 1)}) {
    CHECK(s.size() == 6);
    CHECK(std::set<int>(s.begin(), s.end()).size() == 6);
    for (int i : s) CHECK((i >= 0 && i < 30));
  }
}

TEST_CASE("sign_split") {
  Mat x(4, 1);
  x << 1, -1, 2, -3;
  const auto res = sign_split(x);
  CHECK(res.labels == std::vector<int>{0, 1, 0, 1});
  CHECK_FALSE(res.has_empty_cluster);

  Mat pos(3, 1);
  pos << 1, 2, 3;
  CHECK(sign_split(pos).has_empty_cluster);
  CHECK_THROWS_AS(sign_split(Mat::Zero(3, 2)), MethodError);
}

TEST_CASE("kmedians resists an outlier") {
  Mat x(9, 1);
  x << 0, 0.1, -0.1, 0.05, 10, 10.1, 9.9, 10.05, 14;
  const auto res = kmedians(x, 2, 0);
  std::vector<double> c{res.centers(0, 0), res.centers(1, 0)};
  std::sort(c.begin(), c.end());
  CHECK(c[0] == doctest::Approx(0.025));
  CHECK(c[1] == doctest::Approx(10.05));  // the mean would be 10.81
  CHECK(res.labels[8] == res.labels[4]);
}

TEST_CASE("soft memberships from centers") {
  Mat centers(2, 2);
  centers << 1, 0, 0, 1;
  Mat emb(3, 2);
  emb << 0.5, 0.5,  // equidistant
      1, 0,         // on a center
      0.2, 0.8;
  const Mat m = soft_membership_from_centers(emb, centers);
  CHECK(m(0, 0) == doctest::Approx(0.5));
  CHECK(m(0, 1) == doctest::Approx(0.5));
  CHECK(m(1, 0) == doctest::Approx(1.0));
  CHECK(m(1, 1) == doctest::Approx(0.0));
  CHECK(m(2, 0) == doctest::Approx(0.2));

  // general case: least squares then clamp and renormalize
  Philox rng(10, 0);
  const Mat c = random_matrix(rng, 3, 5);
  const Mat e = random_matrix(rng, 20, 5);
  const Mat got = soft_membership_from_centers(e, c);
  for (int i = 0; i < 20; ++i) {
    Vec beta = (c * c.transpose()).ldlt().solve(c * e.row(i).transpose());
    beta = beta.cwiseMax(0.0);
    if (beta.sum() > 0) {
      beta /= beta.sum();
    } else {
      beta.setConstant(1.0 / 3);
    }
    CHECK((got.row(i).transpose() - beta).norm() < 1e-9);
    CHECK(got.row(i).sum() == doctest::Approx(1.0));
    CHECK(got.row(i).minCoeff() >= 0.0);
  }
  CHECK_THROWS_AS(soft_membership_from_centers(e, Mat::Zero(3, 5)), MethodError);
}

TEST_CASE("threshold_membership keeps the argmax") {
  Mat m(3, 3);
  m << 0.6, 0.3, 0.1, 0.1, 0.1, 0.15, 0.45, 0.45, 0.1;
  const Mat b = threshold_membership(m, 0.2);
  Mat want(3, 3);
  want << 1, 1, 0, 0, 0, 1, 1, 1, 0;
  CHECK(b == want);
}

TEST_CASE("fuzzy c-means memberships are distributions") {
  Philox rng(11, 0);
  std::vector<int> truth;
  const Mat x = clouds(rng, 3, 20, 3, 0.4, &truth);
  const auto res = fuzzy_cmeans(x, 3, 2.0, 5);
  REQUIRE(res.memberships.rows() == 60);
  REQUIRE(res.memberships.cols() == 3);
  for (int i = 0; i < 60; ++i) {
    CHECK(res.memberships.row(i).sum() == doctest::Approx(1.0));
    CHECK(res.memberships.row(i).minCoeff() >= 0.0);
  }
  CHECK(same_partition(res.labels, truth));
}
