#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nck/io.hpp"
#include "nck/metrics.hpp"
#include "nck/sampler.hpp"

using namespace nck;

namespace {

KernelSpec data_spec(KernelFamily family, Scalar gamma0 = 1.0, Scalar tau0 = -0.5) {
  KernelSpec spec;
  spec.family = family;
  spec.gamma0 = gamma0;
  spec.tau0 = tau0;
  return spec;
}

std::shared_ptr<const ConditionedNet> random_encoder(Index d, Index h, std::uint64_t seed) {
  auto net = FeedforwardNet::init({d + 1, 12, h},
                                  {Activation::kSoftplus, Activation::kIdentity}, seed);
  return std::make_shared<const ConditionedNet>(
      std::move(net),
      NoiseConditioning{ConditioningMethod::kConcatLogSigma, OutputScale::kNone});
}

GaussianMixture std_normal(Index d) {
  return GaussianMixture({{1.0, Vector::Zero(d), 1.0}});
}

}  // namespace

TEST_CASE("noise schedules are geometric and strictly decreasing") {
  const NoiseSchedule s = NoiseSchedule::geometric(20.0, 1.0, 10);
  CHECK(s.levels() == 10);
  CHECK(s.sigma(0) == doctest::Approx(20.0));
  CHECK(s.last() == 1.0);
  const Scalar ratio = s.sigma(1) / s.sigma(0);
  for (Index l = 1; l < s.levels(); ++l)
    CHECK(s.sigma(l) / s.sigma(l - 1) == doctest::Approx(ratio).epsilon(1e-12));
  CHECK_THROWS_AS(NoiseSchedule({1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(NoiseSchedule({1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(NoiseSchedule::geometric(1.0, 2.0, 5), std::invalid_argument);
  // The image-style schedule is valid too.
  CHECK_NOTHROW(NoiseSchedule::geometric(1.0, 0.01, 10));
}

TEST_CASE("single-particle self direction is the score") {
  GaussianMixture gm = std_normal(2);
  const ScoreSource source = ScoreSource::analytic(gm, false);
  Matrix particles(1, 2);
  particles << 1.5, -0.5;
  Matrix ref(2, 2);
  ref << 0.0, 0.0, 1.0, 0.0;
  const ConditionedKernel k = condition(data_spec(KernelFamily::kRbf), 1.0, ref);
  const Vector dir = stein_direction(particles, k, source, 1.0, 2.0, 0);
  // k(x, x) = 1 and grad k vanishes at zero distance, so phi = s(x).
  const Vector expected = gm.score(particles.row(0).transpose());
  CHECK((dir - expected).norm() < 1e-14);
}

TEST_CASE("beta = 0 gives the pure kernel-smoothed score") {
  GaussianMixture gm = std_normal(2);
  const ScoreSource source = ScoreSource::analytic(gm, false);
  Rng rng(5);
  const Matrix particles = rng.normal_matrix(16, 2);
  const ConditionedKernel k =
      condition(data_spec(KernelFamily::kRbf), 1.0, rng.normal_matrix(32, 2));
  const Matrix scores = source(particles, 1.0);
  const Matrix gram = k.gram(particles, particles);
  for (Index i = 0; i < particles.rows(); ++i) {
    const Vector dir = stein_direction(particles, k, source, 1.0, 0.0, i);
    const Vector expected =
        (gram.row(i) * scores).transpose() / static_cast<Scalar>(particles.rows());
    CHECK((dir - expected).norm() < 1e-12);
  }
}

TEST_CASE("entropy identity: phi_beta equals beta times phi_1 with score s/beta") {
  GaussianMixture gm({{0.2, Vector::Constant(2, -5.0), 1.0},
                      {0.8, Vector::Constant(2, 5.0), 1.0}});
  const ScoreSource source = ScoreSource::analytic(gm, true);
  Rng rng(7);

  KernelSpec code_spec = data_spec(KernelFamily::kMixed, 0.9, -0.3);
  code_spec.space = KernelSpace::kCode;
  code_spec.encoder = random_encoder(2, 2, 3);

  const std::vector<KernelSpec> specs = {
      data_spec(KernelFamily::kRbf), data_spec(KernelFamily::kImq),
      data_spec(KernelFamily::kMixed), code_spec};
  for (const auto& spec : specs) {
    const ConditionedKernel k = condition(spec, 2.0, rng.normal_matrix(32, 2) * 3.0);
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix particles = rng.normal_matrix(8, 2) * 4.0;
      const Scalar beta = rng.uniform(0.2, 4.0);
      const ScoreSource scaled = source.scaled(1.0 / beta);
      for (Index at = 0; at < particles.rows(); at += 3) {
        const Vector lhs = stein_direction(particles, k, source, 2.0, beta, at);
        const Vector rhs = beta * stein_direction(particles, k, scaled, 2.0, 1.0, at);
        CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));
      }
    }
  }
}

TEST_CASE("vectorized directions match the per-particle loop") {
  GaussianMixture gm = std_normal(3);
  const ScoreSource source = ScoreSource::analytic(gm, true);
  Rng rng(11);
  const Matrix particles = rng.normal_matrix(12, 3);

  KernelSpec code_spec = data_spec(KernelFamily::kMixed);
  code_spec.space = KernelSpace::kCode;
  code_spec.encoder = random_encoder(3, 2, 13);

  for (const auto& spec :
       {data_spec(KernelFamily::kRbf), data_spec(KernelFamily::kMixed), code_spec}) {
    const ConditionedKernel k = condition(spec, 1.5, rng.normal_matrix(24, 3));
    const Matrix all = stein_directions(particles, k, source, 1.5, 1.7);
    for (Index i = 0; i < particles.rows(); ++i) {
      const Vector one = stein_direction(particles, k, source, 1.5, 1.7, i);
      CHECK((all.row(i).transpose() - one).norm() < 1e-10 * std::max(1.0, one.norm()));
    }
  }
}

TEST_CASE("svgd fixed points") {
  GaussianMixture gm = std_normal(2);
  const ScoreSource source = ScoreSource::analytic(gm, false);
  Matrix ref(2, 2);
  ref << 0.0, 0.0, 2.0, 0.0;
  const ConditionedKernel k = condition(data_spec(KernelFamily::kRbf), 1.0, ref);

  // A single particle at the mode stays put.
  Matrix at_mode = Matrix::Zero(1, 2);
  const ParticleSet moved = svgd_step(at_mode, k, source, 1.0, 1.0, 0.5);
  CHECK((moved - at_mode).norm() == 0.0);

  // Two coincident particles with zero score stay coincident.
  const ScoreSource zero = ScoreSource::custom(
      [](const Eigen::Ref<const Matrix>& xs, Scalar) { return Matrix::Zero(xs.rows(), xs.cols()); });
  Matrix twins(2, 2);
  twins << 0.7, -0.2, 0.7, -0.2;
  const ParticleSet still = svgd_step(twins, k, zero, 1.0, 2.0, 0.5);
  CHECK((still.row(0) - still.row(1)).norm() == 0.0);
}

TEST_CASE("svgd gathers the first two moments of a standard normal") {
  const Index n = 256;
  GaussianMixture gm = std_normal(2);
  const ScoreSource source = ScoreSource::analytic(gm, false);
  const ConditionedKernel k =
      condition(data_spec(KernelFamily::kRbf), 1.0, gm.sample(512, 3));
  ParticleSet particles = init_particles({InitMode::kUniformBox, -4.0, 4.0, 1.0, ""}, n, 2, 9);
  for (int t = 0; t < 500; ++t)
    particles = svgd_step(particles, k, source, 1.0, 1.0, 0.3);

  const Vector mean = particles.colwise().mean();
  CHECK(mean.norm() < 0.05);
  const Matrix centered = particles.rowwise() - mean.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<Scalar>(n - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov - Matrix::Identity(2, 2));
  CHECK(eig.eigenvalues().cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("sgld degenerate updates") {
  GaussianMixture gm = std_normal(2);
  const ScoreSource zero = ScoreSource::custom(
      [](const Eigen::Ref<const Matrix>& xs, Scalar) { return Matrix::Zero(xs.rows(), xs.cols()); });
  Rng rng(13);
  const Matrix particles = rng.normal_matrix(8, 2);

  Rng noise(17);
  const ParticleSet unchanged = sgld_step(particles, zero, 1.0, 0.1, 0.0, noise);
  CHECK((unchanged - particles).norm() == 0.0);

  // alpha = 0 is plain gradient ascent with step eta / 2.
  const ScoreSource source = ScoreSource::analytic(gm, false);
  Rng noise2(19);
  const ParticleSet ascent = sgld_step(particles, source, 1.0, 0.1, 0.0, noise2);
  const ParticleSet expected = particles + 0.05 * gm.scores(particles);
  CHECK((ascent - expected).norm() < 1e-14);
}

TEST_CASE("sgld reaches the stationary variance of a standard normal") {
  GaussianMixture gm = std_normal(2);
  const ScoreSource source = ScoreSource::analytic(gm, false);
  ParticleSet particles = Matrix::Zero(512, 2);
  Rng noise(23);
  for (int t = 0; t < 5000; ++t)
    particles = sgld_step(particles, source, 1.0, 1e-2, 1.0, noise);
  for (Index c = 0; c < 2; ++c) {
    const Scalar mean = particles.col(c).mean();
    const Scalar var =
        (particles.col(c).array() - mean).square().sum() / static_cast<Scalar>(511);
    CHECK(var == doctest::Approx(1.0).epsilon(0.15));
  }
}

TEST_CASE("single-level annealing degenerates to plain steps") {
  GaussianMixture gm = std_normal(2);
  const ScoreSource source = ScoreSource::analytic(gm, true);
  const NoiseSchedule single({1.0});
  SamplerConfig cfg;
  cfg.epsilon = 0.2;
  cfg.iters = 5;
  cfg.n = 16;
  cfg.seed = 3;
  const ParticleSet init = init_particles({InitMode::kGaussian, 0, 0, 2.0, ""}, 16, 2, 29);

  AnnealOptions opts;
  opts.median_reference = MedianReference::kParticles;
  const AnnealResult via_anneal =
      anneal(LoopKind::kSvgd, single, cfg, data_spec(KernelFamily::kRbf), source, init, opts);

  const ConditionedKernel k = condition(data_spec(KernelFamily::kRbf), 1.0, init);
  ParticleSet manual = init;
  for (int t = 0; t < cfg.iters; ++t)
    manual = svgd_step(manual, k, source, 1.0, cfg.beta, cfg.epsilon);  // eta_1 = epsilon
  CHECK((via_anneal.particles - manual).norm() == 0.0);
}

TEST_CASE("annealing accepts the toy and image-style protocols") {
  GaussianMixture gm({{0.2, Vector::Constant(2, -5.0), 1.0},
                      {0.8, Vector::Constant(2, 5.0), 1.0}});
  const ScoreSource source = ScoreSource::analytic(gm, true);

  SamplerConfig toy;
  toy.epsilon = 0.1;
  toy.iters = 2;  // shortened run, full protocol shape
  toy.n = 32;
  const NoiseSchedule toy_schedule = NoiseSchedule::geometric(20.0, 1.0, 10);
  const ParticleSet init =
      init_particles({InitMode::kUniformBox, -8.0, 8.0, 1.0, ""}, 32, 2, 31);
  AnnealOptions opts;
  opts.reference_n = 64;
  CHECK_NOTHROW(anneal(LoopKind::kSvgd, toy_schedule, toy, data_spec(KernelFamily::kMixed),
                       source, init, opts));

  SamplerConfig image;
  image.epsilon = 2e-4;
  image.iters = 2;
  image.n = 32;
  for (const Scalar eps : {2e-4, 4e-4, 6e-4}) {
    image.epsilon = eps;
    const NoiseSchedule image_schedule = NoiseSchedule::geometric(1.0, 0.01, 10);
    CHECK_NOTHROW(anneal(LoopKind::kSgld, image_schedule, image, std::nullopt, source, init,
                         opts));
  }
}

TEST_CASE("annealing with a warm-start switch level mixes the two loops") {
  GaussianMixture gm({{0.2, Vector::Constant(2, -5.0), 1.0},
                      {0.8, Vector::Constant(2, 5.0), 1.0}});
  const ScoreSource source = ScoreSource::analytic(gm, true);
  SamplerConfig cfg;
  cfg.epsilon = 0.1;
  cfg.iters = 3;
  cfg.n = 24;
  cfg.seed = 5;
  const NoiseSchedule schedule = NoiseSchedule::geometric(10.0, 1.0, 4);
  const ParticleSet init =
      init_particles({InitMode::kUniformBox, -8.0, 8.0, 1.0, ""}, 24, 2, 37);
  AnnealOptions opts;
  opts.reference_n = 64;
  opts.record_trace = true;
  opts.switch_level = 2;
  const AnnealResult mixed = anneal(LoopKind::kSvgd, schedule, cfg,
                                    data_spec(KernelFamily::kRbf), source, init, opts);
  REQUIRE(mixed.trace.size() == 4);
  CHECK(mixed.trace[0].gamma == 0.0);  // SGLD levels carry no bandwidth
  CHECK(mixed.trace[1].gamma == 0.0);
  CHECK(mixed.trace[2].gamma > 0.0);
  CHECK(mixed.trace[3].gamma > 0.0);
  // eta follows epsilon (sigma_l / sigma_L)^2 per level.
  for (Index l = 0; l < 4; ++l) {
    const Scalar expected =
        cfg.epsilon * std::pow(schedule.sigma(l) / schedule.last(), 2.0);
    CHECK(mixed.trace[static_cast<size_t>(l)].eta == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("annealing is deterministic and permutation equivariant") {
  GaussianMixture gm({{0.3, Vector::Constant(2, -4.0), 1.0},
                      {0.7, Vector::Constant(2, 4.0), 1.0}});
  const ScoreSource source = ScoreSource::analytic(gm, true);
  SamplerConfig cfg;
  cfg.epsilon = 0.2;
  cfg.iters = 4;
  cfg.n = 16;
  cfg.seed = 77;
  const NoiseSchedule schedule = NoiseSchedule::geometric(5.0, 1.0, 3);
  const ParticleSet init =
      init_particles({InitMode::kUniformBox, -8.0, 8.0, 1.0, ""}, 16, 2, 41);
  AnnealOptions opts;
  opts.reference_n = 64;

  const AnnealResult a =
      anneal(LoopKind::kSvgd, schedule, cfg, data_spec(KernelFamily::kMixed), source, init, opts);
  const AnnealResult b =
      anneal(LoopKind::kSvgd, schedule, cfg, data_spec(KernelFamily::kMixed), source, init, opts);
  CHECK((a.particles - b.particles).norm() == 0.0);

  // Permuting the initial particles permutes the outputs (up to round-off
  // from reordered reductions).
  std::vector<Index> perm(16);
  for (Index i = 0; i < 16; ++i) perm[static_cast<size_t>(i)] = (i * 5 + 3) % 16;
  Matrix permuted_init(16, 2);
  for (Index i = 0; i < 16; ++i) permuted_init.row(perm[static_cast<size_t>(i)]) = init.row(i);
  const AnnealResult c = anneal(LoopKind::kSvgd, schedule, cfg, data_spec(KernelFamily::kMixed),
                                source, permuted_init, opts);
  for (Index i = 0; i < 16; ++i)
    CHECK((c.particles.row(perm[static_cast<size_t>(i)]) - a.particles.row(i)).norm() < 1e-9);
}

TEST_CASE("sgld noise splitting keeps runs deterministic") {
  GaussianMixture gm = std_normal(2);
  const ScoreSource source = ScoreSource::analytic(gm, true);
  SamplerConfig cfg;
  cfg.epsilon = 0.05;
  cfg.iters = 10;
  cfg.n = 8;
  cfg.seed = 123;
  const NoiseSchedule schedule = NoiseSchedule::geometric(4.0, 1.0, 3);
  const ParticleSet init = init_particles({InitMode::kGaussian, 0, 0, 1.0, ""}, 8, 2, 43);
  const AnnealResult a = anneal(LoopKind::kSgld, schedule, cfg, std::nullopt, source, init);
  const AnnealResult b = anneal(LoopKind::kSgld, schedule, cfg, std::nullopt, source, init);
  CHECK((a.particles - b.particles).norm() == 0.0);
  SamplerConfig other = cfg;
  other.seed = 124;
  const AnnealResult c = anneal(LoopKind::kSgld, schedule, other, std::nullopt, source, init);
  CHECK((a.particles - c.particles).norm() > 0.0);
}

TEST_CASE("diverging runs abort with level context") {
  GaussianMixture gm = std_normal(1);
  const ScoreSource source = ScoreSource::analytic(gm, true);
  SamplerConfig cfg;
  cfg.epsilon = 1e9;  // mis-scaled step
  cfg.iters = 50;
  cfg.n = 8;
  const NoiseSchedule schedule = NoiseSchedule::geometric(10.0, 1.0, 3);
  const ParticleSet init = init_particles({InitMode::kGaussian, 0, 0, 1.0, ""}, 8, 1, 47);
  AnnealOptions opts;
  opts.reference_n = 32;
  try {
    anneal(LoopKind::kSvgd, schedule, cfg, data_spec(KernelFamily::kRbf), source, init, opts);
    FAIL("expected divergence abort");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("level") != std::string::npos);
  }
}

TEST_CASE("init particles: box bounds, degenerate gaussian, file round trip") {
  const ParticleSet box =
      init_particles({InitMode::kUniformBox, -8.0, 8.0, 1.0, ""}, 1024, 2, 51);
  CHECK(box.minCoeff() >= -8.0);
  CHECK(box.maxCoeff() <= 8.0);

  const ParticleSet origin = init_particles({InitMode::kGaussian, 0, 0, 0.0, ""}, 16, 3, 53);
  CHECK(origin.norm() == 0.0);

  const std::string path = "init_roundtrip_test.bin";
  write_particles(path, box, 4, 2.5);
  const ParticleSet loaded =
      init_particles({InitMode::kFromFile, 0, 0, 1.0, path}, 1024, 2, 0);
  CHECK((loaded - box).norm() == 0.0);
  const ParticleFile file = read_particles(path);
  CHECK(file.level == 4);
  CHECK(file.sigma == 2.5);
  std::remove(path.c_str());
}
