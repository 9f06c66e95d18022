#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nck/gaussian_mixture.hpp"
#include "nck/kernel.hpp"
#include "nck/rng.hpp"
#include "nck/sampler.hpp"

using namespace nck;

namespace {

std::shared_ptr<const ConditionedNet> random_encoder(Index d, Index h, std::uint64_t seed) {
  auto net = FeedforwardNet::init({d + 1, 16, h},
                                  {Activation::kSoftplus, Activation::kIdentity}, seed);
  return std::make_shared<const ConditionedNet>(
      std::move(net), NoiseConditioning{ConditioningMethod::kConcatLogSigma,
                                        OutputScale::kNone});
}

Matrix reference_with_median(Scalar med) {
  // Two points at distance med.
  Matrix ref(2, 1);
  ref << 0.0, med;
  return ref;
}

Vector fd_grad_x(const ConditionedKernel& k, const Vector& x, const Vector& y) {
  Vector g(x.size());
  const Scalar h = 1e-5;
  for (Index j = 0; j < x.size(); ++j) {
    Vector xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (k.eval(xp, y) - k.eval(xm, y)) / (2.0 * h);
  }
  return g;
}

KernelSpec spec_of(KernelFamily family, Scalar gamma0 = 1.0, Scalar tau0 = -0.5) {
  KernelSpec spec;
  spec.family = family;
  spec.gamma0 = gamma0;
  spec.tau0 = tau0;
  return spec;
}

}  // namespace

TEST_CASE("median of hand-enumerable point sets") {
  Matrix a(3, 1);
  a << 0.0, 1.0, 3.0;  // distances 1, 2, 3
  CHECK(median_pairwise(a) == doctest::Approx(2.0).epsilon(1e-12));

  Matrix b(2, 2);
  b << 0.0, 0.0, 3.0, 4.0;
  CHECK(median_pairwise(b) == doctest::Approx(5.0).epsilon(1e-12));

  Matrix c(4, 1);
  c << 0.0, 1.0, 2.0, 10.0;  // distances 1,2,10,1,9,8 -> median (2+8)/2
  CHECK(median_pairwise(c) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("median rejects degenerate inputs") {
  CHECK_THROWS_AS(median_pairwise(Matrix::Zero(1, 2)), std::invalid_argument);
  CHECK_THROWS_AS(median_pairwise(Matrix::Zero(5, 2)), std::invalid_argument);
}

TEST_CASE("median grows with the noise level at d = 64") {
  GaussianMixture gm({{0.2, Vector::Constant(64, -5.0), 1.0},
                      {0.8, Vector::Constant(64, 5.0), 1.0}});
  const NoiseSchedule up = NoiseSchedule::geometric(20.0, 1.0, 10);
  Scalar prev = 0.0;
  for (Index l = up.levels() - 1; l >= 0; --l) {  // sigma from 1 up to 20
    const Scalar sigma = up.sigma(l);
    const Matrix sample = gm.perturbed(sigma).sample(4096, 77);
    const Scalar med = median_pairwise(sample);
    CHECK(med > prev);
    prev = med;
  }
}

TEST_CASE("conditioning resolves gamma from the reference median") {
  ConditionedKernel k = condition(spec_of(KernelFamily::kRbf), 1.0, reference_with_median(2.0));
  CHECK(k.gamma() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(k.tau() == doctest::Approx(-0.5));

  // Different reference scales at two sigma levels give different gammas.
  ConditionedKernel a = condition(spec_of(KernelFamily::kRbf), 1.0, reference_with_median(1.0));
  ConditionedKernel b = condition(spec_of(KernelFamily::kRbf), 5.0, reference_with_median(4.0));
  CHECK(a.gamma() != b.gamma());

  // The reported search grid is accepted.
  for (const Scalar g0 : {0.4, 0.6, 0.8, 1.0, 2.0, 4.0})
    CHECK_NOTHROW(condition(spec_of(KernelFamily::kMixed, g0), 1.0, reference_with_median(2.0)));
}

TEST_CASE("conditioning under the squared-median rule") {
  KernelSpec spec = spec_of(KernelFamily::kRbf, 1.0);
  spec.bandwidth_rule = BandwidthRule::kMedianSqDistance;
  ConditionedKernel k = condition(spec, 1.0, reference_with_median(2.0));
  CHECK(k.gamma() == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("kernel values at hand points") {
  const Matrix ref = reference_with_median(2.0);
  Vector x = Vector::Zero(1);

  ConditionedKernel rbf = condition(spec_of(KernelFamily::kRbf), 1.0, ref);
  CHECK(rbf.eval(x, x) == doctest::Approx(1.0).epsilon(1e-15));

  ConditionedKernel imq = condition(spec_of(KernelFamily::kImq), 1.0, ref);
  Vector y = Vector::Constant(1, std::sqrt(3.0));
  CHECK(imq.eval(x, y) == doctest::Approx(0.5).epsilon(1e-12));  // (1+3)^-0.5

  ConditionedKernel mixed = condition(spec_of(KernelFamily::kMixed), 1.0, ref);
  CHECK(mixed.eval(x, x) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("gradient closed forms and vanishing at zero distance") {
  const Matrix ref = reference_with_median(1.0);
  for (const auto family : {KernelFamily::kRbf, KernelFamily::kImq, KernelFamily::kMixed}) {
    ConditionedKernel k = condition(spec_of(family), 1.0, ref);
    Vector x = Vector::Constant(2, 0.3);
    CHECK(k.grad_x(x, x).norm() == 0.0);
  }
  ConditionedKernel rbf = condition(spec_of(KernelFamily::kRbf), 1.0, ref);  // gamma = 1
  Vector x1 = Vector::Constant(1, 1.0);
  Vector y0 = Vector::Zero(1);
  CHECK(rbf.grad_x(x1, y0)[0] == doctest::Approx(-2.0 * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("gradients match finite differences in data space") {
  Rng rng(21);
  const Matrix ref = reference_with_median(1.7);
  for (const auto family : {KernelFamily::kRbf, KernelFamily::kImq, KernelFamily::kMixed}) {
    for (const bool rescale : {false, true}) {
      KernelSpec spec = spec_of(family, 1.3, -0.3);
      spec.imq_rescale = rescale;
      ConditionedKernel k = condition(spec, 2.0, ref);
      for (int t = 0; t < 10; ++t) {
        const Vector x = rng.normal_vector(3);
        const Vector y = rng.normal_vector(3);
        const Vector got = k.grad_x(x, y);
        const Vector want = fd_grad_x(k, x, y);
        CHECK((got - want).norm() < 1e-4 * std::max(1.0, want.norm()));
      }
    }
  }
}

TEST_CASE("code-space gradients match finite differences") {
  Rng rng(31);
  KernelSpec spec = spec_of(KernelFamily::kMixed, 0.8, -0.4);
  spec.space = KernelSpace::kCode;
  spec.encoder = random_encoder(3, 2, 5);
  Matrix ref = rng.normal_matrix(16, 3);
  ConditionedKernel k = condition(spec, 0.7, ref);
  for (int t = 0; t < 10; ++t) {
    const Vector x = rng.normal_vector(3);
    const Vector y = rng.normal_vector(3);
    const Vector got = k.grad_x(x, y);
    const Vector want = fd_grad_x(k, x, y);
    CHECK((got - want).norm() < 1e-4 * std::max(1.0, want.norm()));
  }
}

TEST_CASE("code-space median option changes the resolved gamma") {
  Rng rng(41);
  KernelSpec spec = spec_of(KernelFamily::kRbf);
  spec.space = KernelSpace::kCode;
  spec.encoder = random_encoder(3, 2, 6);
  Matrix ref = rng.normal_matrix(32, 3);
  ConditionedKernel data_median = condition(spec, 1.0, ref);
  spec.code_space_median = true;
  ConditionedKernel code_median = condition(spec, 1.0, ref);
  CHECK(data_median.gamma() != code_median.gamma());
}

TEST_CASE("symmetry and boundedness") {
  Rng rng(51);
  const Matrix ref = reference_with_median(1.2);
  KernelSpec code_spec = spec_of(KernelFamily::kMixed);
  code_spec.space = KernelSpace::kCode;
  code_spec.encoder = random_encoder(3, 2, 7);
  const std::vector<ConditionedKernel> kernels = {
      condition(spec_of(KernelFamily::kRbf), 1.0, ref),
      condition(spec_of(KernelFamily::kImq), 1.0, ref),
      condition(spec_of(KernelFamily::kMixed), 1.0, ref),
      condition(code_spec, 1.0, rng.normal_matrix(8, 3)),
  };
  for (const auto& k : kernels) {
    const Scalar upper = k.spec().family == KernelFamily::kMixed ? 2.0 : 1.0;
    for (int t = 0; t < 25; ++t) {
      const Vector x = rng.normal_vector(3) * 2.0;
      const Vector y = rng.normal_vector(3) * 2.0;
      const Scalar kxy = k.eval(x, y);
      CHECK(kxy == doctest::Approx(k.eval(y, x)).epsilon(1e-12));
      CHECK(kxy > 0.0);
      CHECK(kxy <= upper + 1e-12);
    }
  }
}

TEST_CASE("gram matrices are positive semidefinite in data space") {
  Rng rng(61);
  const Matrix points = rng.normal_matrix(32, 4);
  const Matrix ref = rng.normal_matrix(64, 4);
  for (const auto family : {KernelFamily::kRbf, KernelFamily::kImq, KernelFamily::kMixed}) {
    ConditionedKernel k = condition(spec_of(family, 1.0, -0.3), 1.0, ref);
    const Matrix gram = k.gram(points, points);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (gram + gram.transpose()));
    const Scalar min_eig = eig.eigenvalues().minCoeff();
    const Scalar max_eig = eig.eigenvalues().maxCoeff();
    CHECK(min_eig >= -1e-8 * max_eig);
  }
}

TEST_CASE("eval rejects dimension mismatches") {
  ConditionedKernel k = condition(spec_of(KernelFamily::kRbf), 1.0, reference_with_median(1.0));
  CHECK_THROWS_AS(k.eval(Vector::Zero(2), Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("invalid specs are rejected") {
  KernelSpec bad_gamma = spec_of(KernelFamily::kRbf, -1.0);
  CHECK_THROWS_AS(condition(bad_gamma, 1.0, reference_with_median(1.0)), std::invalid_argument);
  KernelSpec bad_tau = spec_of(KernelFamily::kImq, 1.0, 0.5);
  CHECK_THROWS_AS(condition(bad_tau, 1.0, reference_with_median(1.0)), std::invalid_argument);
  KernelSpec code_no_encoder = spec_of(KernelFamily::kRbf);
  code_no_encoder.space = KernelSpace::kCode;
  CHECK_THROWS_AS(condition(code_no_encoder, 1.0, reference_with_median(1.0)),
                  std::invalid_argument);
}
