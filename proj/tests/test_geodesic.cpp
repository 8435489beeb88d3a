#include <doctest.h>

#include <cmath>

#include "geodcd/error.hpp"
#include "geodcd/geodesic.hpp"
#include "support.hpp"

using namespace geodcd;
using namespace geodcd::testing;

namespace {

// Direct evaluation: sum_i ||M_i - U U^T M_i||^2 with U = P C(t_i).
double direct_objective(const GeodesicModel& m, const std::vector<Mat>& mcms, const std::vector<double>& times) {
  double s = 0.0;
  for (std::size_t i = 0; i < mcms.size(); ++i) {
    Mat c(2 * m.k(), m.k());
    c.setZero();
    for (int j = 0; j < m.k(); ++j) {
      c(j, j) = std::cos(m.theta[j] * times[i]);
      c(m.k() + j, j) = std::sin(m.theta[j] * times[i]);
    }
    const Mat u = m.P * c;
    s += (mcms[i] - u * u.transpose() * mcms[i]).squaredNorm();
  }
  return s;
}

std::vector<Mat> random_mcms(Philox& rng, int d, int T, int cols = -1) {
  std::vector<Mat> out;
  for (int i = 0; i < T; ++i) out.push_back(random_matrix(rng, d, cols < 0 ? d : cols));
  return out;
}

}  // namespace

TEST_CASE("objective") {
  Philox rng(30, 0);
  GeodesicModel m = random_geodesic(rng, 6, 2);
  const auto times = uniform_times(3);
  CHECK(objective(m, {Mat::Zero(6, 6), Mat::Zero(6, 6), Mat::Zero(6, 6)}, times) == 0.0);
  const auto mcms = random_mcms(rng, 6, 3);
  CHECK(objective(m, mcms, times) == doctest::Approx(direct_objective(m, mcms, times)).epsilon(1e-12));

  // T = 1, U = top-k subspace: Eckart-Young residual
  const Mat m1 = random_matrix(rng, 7, 7);
  GeodesicModel one;
  one.P = Mat::Zero(7, 4);
  one.P.leftCols(2) = top_left_singular(m1, 2);
  one.P.rightCols(2) = orthonormalize((Mat::Identity(7, 7) - one.P.leftCols(2) * one.P.leftCols(2).transpose()) *
                                      random_matrix(rng, 7, 2));
  one.theta = Vec::Zero(2);
  const Vec s = singular_values(m1);
  CHECK(objective(one, {m1}, {0.0}) == doctest::Approx(s.tail(5).squaredNorm()).epsilon(1e-10));
}

TEST_CASE("C(t) and evaluate") {
  Philox rng(31, 0);
  const GeodesicModel m = random_geodesic(rng, 9, 3);
  for (double t : {0.0, 0.3, 1.0}) {
    const Mat u = m.evaluate(t);
    CHECK((u.transpose() * u - Mat::Identity(3, 3)).norm() < 1e-12);
  }
  CHECK((m.evaluate(0.0) - m.P.leftCols(3)).norm() < 1e-14);
}

TEST_CASE("init_geodesic") {
  Philox rng(32, 0);
  const Mat a = random_matrix(rng, 8, 8);
  const GeodesicModel same = init_geodesic({a, a, a}, 2);
  CHECK(same.theta.norm() < 1e-7);
  CHECK(subspace_distance(same.evaluate(0.5), top_left_singular(a, 2)) < 1e-7);

  Mat e1 = Mat::Zero(2, 2), e2 = Mat::Zero(2, 2);
  e1(0, 0) = 1.0;
  e2(1, 1) = 1.0;
  const GeodesicModel ortho = init_geodesic({e1, e2}, 1);
  CHECK(ortho.theta[0] == doctest::Approx(M_PI / 2));

  for (int trial = 0; trial < 5; ++trial) {
    const auto mcms = random_mcms(rng, 8, 2);
    const GeodesicModel g = init_geodesic(mcms, 2);
    CHECK(subspace_distance(g.evaluate(0.0), top_left_singular(mcms[0], 2)) < 1e-8);
    CHECK(subspace_distance(g.evaluate(1.0), top_left_singular(mcms[1], 2)) < 1e-8);
    CHECK((g.P.transpose() * g.P - Mat::Identity(4, 4)).norm() < 1e-10);
  }
  CHECK_THROWS_AS(init_geodesic({a}, 5), MethodError);

  // pooled ends
  const auto mcms = random_mcms(rng, 10, 6);
  const GeodesicModel w = init_geodesic(mcms, 2, 3);
  Mat first(10, 30);
  first << mcms[0], mcms[1], mcms[2];
  CHECK(subspace_distance(w.evaluate(0.0), top_left_singular(first, 2)) < 1e-8);
}

TEST_CASE("p_update keeps the optimum for constant data") {
  Philox rng(33, 0);
  const Mat m = random_matrix(rng, 8, 8);
  const std::vector<Mat> mcms(4, m);
  const auto times = uniform_times(4);
  GeodesicModel g = init_geodesic(mcms, 2);
  const Mat next = p_update(g.P, g.theta, mcms, times);
  CHECK(subspace_distance(next.leftCols(2), g.P.leftCols(2)) < 1e-8);
}

TEST_CASE("theta_update") {
  Philox rng(34, 0);
  const Mat m = random_matrix(rng, 8, 8);
  const std::vector<Mat> mcms(4, m);
  const auto times = uniform_times(4);
  GeodesicModel g = init_geodesic(mcms, 2);
  g.theta.setZero();
  CHECK(theta_update(g.P, g.theta, mcms, times, 5).norm() < 1e-10);

  const GeodesicModel r = random_geodesic(rng, 8, 2);
  CHECK((theta_update(r.P, r.theta, {m}, {0.0}, 5) - r.theta).norm() == 0.0);

  for (int trial = 0; trial < 20; ++trial) {
    const GeodesicModel q = random_geodesic(rng, 6, 2);
    const auto data = random_mcms(rng, 6, 5);
    const auto t = uniform_times(5);
    GeodesicModel next = q;
    next.theta = theta_update(q.P, q.theta, data, t, 5);
    CHECK(objective(next, data, t) <= objective(q, data, t) + 1e-10);
  }
}

TEST_CASE("theta gradient matches central differences") {
  Philox rng(35, 0);
  for (int trial = 0; trial < 20; ++trial) {
    GeodesicModel q = random_geodesic(rng, 6, 2);
    const auto data = random_mcms(rng, 6, 5);
    const auto t = uniform_times(5);
    const Vec g = theta_gradient(q.P, q.theta, data, t);
    for (int j = 0; j < 2; ++j) {
      const double h = 1e-5;
      GeodesicModel a = q, b = q;
      a.theta[j] += h;
      b.theta[j] -= h;
      const double fd = (objective(a, data, t) - objective(b, data, t)) / (2 * h);
      CHECK(g[j] == doctest::Approx(fd).epsilon(1e-5).scale(1e-3));
    }
  }
}

TEST_CASE("fit descends monotonically") {
  Philox rng(36, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = rng.bernoulli(0.5) ? 6 : 20;
    const int k = 1 + static_cast<int>(rng.below(3));
    const int T = rng.bernoulli(0.5) ? 3 : 10;
    const auto data = random_mcms(rng, d, T);
    FitReport rep;
    const GeodesicModel g = fit_geodesic(data, uniform_times(T), k, {}, &rep);
    CHECK(g.theta.minCoeff() >= 0.0);
    for (std::size_t i = 1; i < rep.objective_trace.size(); ++i)
      CHECK(rep.objective_trace[i] <= rep.objective_trace[i - 1] + 1e-9);
    CHECK(rep.final_objective == rep.objective_trace.back());
  }
}

TEST_CASE("planted geodesic is recovered") {
  Philox rng(37, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const GeodesicModel truth = random_geodesic(rng, 20, 2);
    const auto times = uniform_times(8);
    const auto data = planted_mcms(rng, truth, times, 12);
    FitOptions opt;
    opt.max_outer = 500;
    opt.tol = 1e-14;
    const GeodesicModel fit = fit_geodesic(data, times, 2, opt);
    CHECK(objective(fit, data, times) <= 1e-8 * frob2(data));
    for (double t : times) CHECK(subspace_distance(fit.evaluate(t), truth.evaluate(t)) < 1e-4);
  }
}

TEST_CASE("planted geodesic with noise") {
  Philox rng(38, 0);
  const GeodesicModel truth = random_geodesic(rng, 20, 2);
  const auto times = uniform_times(10);
  const auto data = add_noise(rng, planted_mcms(rng, truth, times, 12), 40.0);
  const GeodesicModel fit = fit_geodesic(data, times, 2);
  for (double t : times) CHECK(subspace_distance(fit.evaluate(t), truth.evaluate(t)) < 0.1);
}

TEST_CASE("T = 2 reproduces rank-k endpoints") {
  Philox rng(39, 0);
  const Mat a = random_orthonormal(rng, 10, 2) * random_matrix(rng, 2, 10);
  const Mat b = random_orthonormal(rng, 10, 2) * random_matrix(rng, 2, 10);
  FitReport rep;
  const GeodesicModel g = fit_geodesic({a, b}, {0.0, 1.0}, 2, {}, &rep);
  CHECK(rep.objective_trace.front() <= 1e-10 * (a.squaredNorm() + b.squaredNorm()));
  CHECK(subspace_distance(g.evaluate(0.0), top_left_singular(a, 2)) < 1e-6);
  CHECK(subspace_distance(g.evaluate(1.0), top_left_singular(b, 2)) < 1e-6);
}

TEST_CASE("rectangular snapshots and degenerate input") {
  Philox rng(40, 0);
  const auto data = random_mcms(rng, 9, 4, 5);
  FitReport rep;
  CHECK_NOTHROW(fit_geodesic(data, uniform_times(4), 2, {}, &rep));
  CHECK(rep.iterations >= 1);
  CHECK_THROWS_AS(fit_geodesic({Mat::Zero(6, 6), Mat::Zero(6, 6)}, {0.0, 1.0}, 2), MethodError);
  CHECK_THROWS_AS(p_update(random_orthonormal(rng, 6, 4), Vec::Zero(2), {Mat::Zero(6, 6)}, {0.0}), MethodError);
  CHECK_THROWS_AS(fit_geodesic(data, uniform_times(3), 2), MethodError);
}
