#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nck/gaussian_mixture.hpp"
#include "nck/rng.hpp"

using namespace nck;

namespace {

GaussianMixture two_mode_2d() {
  return GaussianMixture({{0.2, Vector::Constant(2, -5.0), 1.0},
                          {0.8, Vector::Constant(2, 5.0), 1.0}});
}

// Central finite-difference gradient of log_density, step scaled per
// coordinate; independent oracle for every score test.
Vector fd_score(const GaussianMixture& gm, const Vector& x) {
  Vector g(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    const Scalar h = 1e-4 * (1.0 + std::abs(x[j]));
    Vector xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (gm.log_density(xp) - gm.log_density(xm)) / (2.0 * h);
  }
  return g;
}

Scalar rel_err(const Vector& got, const Vector& want) {
  return (got - want).norm() / std::max(1e-12, want.norm());
}

}  // namespace

TEST_CASE("log density of standard normal at the mode") {
  GaussianMixture gm({{1.0, Vector::Zero(1), 1.0}});
  CHECK(gm.log_density(Vector::Zero(1)) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-12));
}

TEST_CASE("log density matches a direct two-term sum") {
  GaussianMixture gm({{0.2, Vector::Constant(1, -5.0), 1.0},
                      {0.8, Vector::Constant(1, 5.0), 1.0}});
  // Oracle: direct evaluation of 0.8 N(0;0,1) + 0.2 N(10;0,1).
  const Scalar inv_sqrt_2pi = 0.3989422804014327;
  const Scalar expected =
      std::log(0.8 * inv_sqrt_2pi + 0.2 * inv_sqrt_2pi * std::exp(-50.0));
  CHECK(gm.log_density(Vector::Constant(1, 5.0)) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("weights are normalized silently") {
  GaussianMixture raw({{2.0, Vector::Constant(1, -5.0), 1.0},
                       {8.0, Vector::Constant(1, 5.0), 1.0}});
  GaussianMixture norm({{0.2, Vector::Constant(1, -5.0), 1.0},
                        {0.8, Vector::Constant(1, 5.0), 1.0}});
  CHECK(raw.components()[0].weight == 2.0);  // raw values preserved
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    Vector x = Vector::Constant(1, rng.uniform(-10.0, 10.0));
    CHECK(raw.log_density(x) == doctest::Approx(norm.log_density(x)).epsilon(1e-14));
    CHECK(raw.score(x)[0] == doctest::Approx(norm.score(x)[0]).epsilon(1e-14));
  }
}

TEST_CASE("score of standard normal") {
  GaussianMixture gm({{1.0, Vector::Zero(2), 1.0}});
  CHECK(gm.score(Vector::Zero(2)).norm() == 0.0);
  Vector x(2);
  x << 2.0, -3.0;
  Vector s = gm.score(x);
  CHECK(s[0] == doctest::Approx(-2.0));
  CHECK(s[1] == doctest::Approx(3.0));
}

TEST_CASE("score matches finite differences on the imbalanced mixture") {
  GaussianMixture gm = two_mode_2d();
  Vector x = Vector::Constant(2, 5.0);
  CHECK(rel_err(gm.score(x), fd_score(gm, x)) < 1e-6);
}

TEST_CASE("score/finite-difference agreement at random points") {
  GaussianMixture gm({{0.5, Vector::Constant(3, -1.0), 0.5},
                      {1.5, Vector::Constant(3, 2.0), 2.0},
                      {1.0, Vector::Zero(3), 1.3}});
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    Vector x = rng.normal_vector(3) * 3.0;
    CHECK(rel_err(gm.score(x), fd_score(gm, x)) < 1e-5);
  }
}

TEST_CASE("perturb adds variance and rejects sigma <= 0") {
  GaussianMixture gm({{1.0, Vector::Zero(1), 1.0}});
  CHECK(gm.perturbed(1.0).components()[0].variance == doctest::Approx(2.0));
  CHECK_THROWS_AS(gm.perturbed(0.0), std::invalid_argument);
  CHECK_THROWS_AS(gm.perturbed(-1.0), std::invalid_argument);
}

TEST_CASE("perturb at sigma -> 0 approaches the original density") {
  GaussianMixture gm = two_mode_2d();
  GaussianMixture tiny = gm.perturbed(1e-8);
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    Vector x = rng.normal_vector(2) * 6.0;
    CHECK(std::abs(tiny.log_density(x) - gm.log_density(x)) < 1e-6);
  }
}

TEST_CASE("perturbed score matches finite differences") {
  GaussianMixture gm = two_mode_2d().perturbed(3.0);
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    Vector x = rng.normal_vector(2) * 8.0;
    CHECK(rel_err(gm.score(x), fd_score(gm, x)) < 1e-5);
  }
}

TEST_CASE("perturb composes as a Gaussian semigroup") {
  GaussianMixture gm = two_mode_2d();
  GaussianMixture ab = gm.perturbed(1.5).perturbed(2.0);
  GaussianMixture direct = gm.perturbed(std::sqrt(1.5 * 1.5 + 2.0 * 2.0));
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    Vector x = rng.normal_vector(2) * 10.0;
    CHECK(ab.log_density(x) == doctest::Approx(direct.log_density(x)).epsilon(1e-12));
  }
}

TEST_CASE("sampling respects mixture weights") {
  GaussianMixture gm = two_mode_2d();
  Matrix x = gm.sample(10000, 42);
  const Scalar frac_low = (x.col(0).array() < 0.0).cast<Scalar>().mean();
  CHECK(frac_low == doctest::Approx(0.2).epsilon(0.075));  // 0.2 +- 0.015
  CHECK(std::abs(frac_low - 0.2) < 0.015);
}

TEST_CASE("sampling is deterministic given the seed") {
  GaussianMixture gm = two_mode_2d();
  Matrix a = gm.sample(512, 123);
  Matrix b = gm.sample(512, 123);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  Matrix c = gm.sample(512, 124);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("sample mean of the standard normal concentrates") {
  GaussianMixture gm({{1.0, Vector::Zero(2), 1.0}});
  Matrix x = gm.sample(100000, 7);
  CHECK(std::abs(x.col(0).mean()) < 0.02);
  CHECK(std::abs(x.col(1).mean()) < 0.02);
}

TEST_CASE("sample occupancy tracks normalized weights within 3 sigma") {
  GaussianMixture gm({{1.0, Vector::Constant(2, -6.0), 1.0},
                      {2.0, Vector::Zero(2), 1.0},
                      {1.0, Vector::Constant(2, 6.0), 1.0}});
  const Index n = 20000;
  Matrix x = gm.sample(n, 99);
  Vector counts = Vector::Zero(3);
  for (Index r = 0; r < n; ++r) {
    Index best = 0;
    Scalar best_d = std::numeric_limits<Scalar>::infinity();
    for (Index c = 0; c < 3; ++c) {
      Scalar d = (x.row(r).transpose() - gm.components()[c].mean).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    counts[best] += 1.0;
  }
  for (Index c = 0; c < 3; ++c) {
    const Scalar w = gm.weights()[c];
    const Scalar bound = 3.0 * std::sqrt(w * (1.0 - w) / static_cast<Scalar>(n));
    CHECK(std::abs(counts[c] / static_cast<Scalar>(n) - w) < bound);
  }
}

TEST_CASE("dimension mismatches and invalid inputs are rejected") {
  GaussianMixture gm = two_mode_2d();
  CHECK_THROWS_AS(gm.log_density(Vector::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(gm.score(Vector::Zero(1)), std::invalid_argument);
  Vector bad(2);
  bad << 1.0, std::numeric_limits<Scalar>::quiet_NaN();
  CHECK_THROWS_AS(gm.log_density(bad), std::invalid_argument);
  CHECK_THROWS_AS(GaussianMixture({}), std::invalid_argument);
  CHECK_THROWS_AS(GaussianMixture({{1.0, Vector::Zero(1), 0.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(GaussianMixture({{-0.5, Vector::Zero(1), 1.0}}),
                  std::invalid_argument);
}
