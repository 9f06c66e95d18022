#include "nck/sampler.hpp"

#include <cmath>
#include <sstream>

#include "nck/io.hpp"

namespace nck {

NoiseSchedule::NoiseSchedule(std::vector<Scalar> sigmas) : sigmas_(std::move(sigmas)) {
  require(!sigmas_.empty(), "NoiseSchedule: at least one level required");
  for (size_t l = 0; l < sigmas_.size(); ++l) {
    require(std::isfinite(sigmas_[l]) && sigmas_[l] > 0.0,
            "NoiseSchedule: sigmas must be positive");
    if (l > 0)
      require(sigmas_[l] < sigmas_[l - 1], "NoiseSchedule: sigmas must strictly decrease");
  }
}

NoiseSchedule NoiseSchedule::geometric(Scalar sigma_first, Scalar sigma_last, Index levels) {
  require(levels >= 1, "NoiseSchedule: levels must be >= 1");
  require(sigma_first > 0.0 && sigma_last > 0.0, "NoiseSchedule: sigmas must be positive");
  if (levels == 1) {
    require(sigma_first == sigma_last,
            "NoiseSchedule: single-level schedule needs sigma_first == sigma_last");
    return NoiseSchedule({sigma_last});
  }
  require(sigma_first > sigma_last, "NoiseSchedule: sigma_first must exceed sigma_last");
  const Scalar ratio = std::pow(sigma_last / sigma_first,
                                1.0 / static_cast<Scalar>(levels - 1));
  std::vector<Scalar> sigmas(static_cast<size_t>(levels));
  for (Index l = 0; l < levels; ++l)
    sigmas[static_cast<size_t>(l)] = sigma_first * std::pow(ratio, static_cast<Scalar>(l));
  sigmas.back() = sigma_last;  // pin the endpoint against pow() drift
  return NoiseSchedule(std::move(sigmas));
}

void SamplerConfig::validate() const {
  require(std::isfinite(epsilon) && epsilon > 0.0, "SamplerConfig: epsilon must be positive");
  require(iters >= 1, "SamplerConfig: iters must be >= 1");
  require(std::isfinite(beta) && beta >= 0.0, "SamplerConfig: beta must be nonnegative");
  require(std::isfinite(alpha) && alpha >= 0.0, "SamplerConfig: alpha must be nonnegative");
  require(n >= 1, "SamplerConfig: n must be >= 1");
}

namespace {

void check_scores(const Matrix& scores, const char* where) {
  if (scores.allFinite()) return;
  for (Index i = 0; i < scores.rows(); ++i) {
    if (!scores.row(i).allFinite()) {
      std::ostringstream msg;
      msg << where << ": non-finite score for particle " << i;
      throw std::runtime_error(msg.str());
    }
  }
}

}  // namespace

Matrix stein_directions(const Eigen::Ref<const Matrix>& particles, const ConditionedKernel& k,
                        const ScoreSource& s, Scalar sigma, Scalar beta) {
  validate_particles(particles, "stein_directions");
  const Index n = particles.rows();
  const Matrix scores = s(particles, sigma);
  check_scores(scores, "stein_directions");

  const Matrix embedded = k.embed(particles);
  const Matrix r2 = pairwise_sq_dists(embedded, embedded);
  const Matrix gram = k.value_from_r2(r2);
  const Scalar inv_n = 1.0 / static_cast<Scalar>(n);

  Matrix phi = gram * scores;  // attraction: sum_j k(x_j, x_i) s(x_j)

  if (beta != 0.0) {
    const Matrix dcoeff = k.dcoeff_from_r2(r2);
    if (k.spec().space == KernelSpace::kData) {
      // sum_j grad_{x_j} k(x_j, x_i) = sum_j c_ij (x_j - x_i)
      phi.noalias() += beta * (dcoeff * particles);
      phi.noalias() -= beta * (dcoeff.rowwise().sum().asDiagonal() * particles);
    } else {
      // Code space: chain rule through the encoder. J_j = dE/dx at x_j,
      // contribution to phi_i is J_j^T [c_ij (u_j - u_i)].
      const ConditionedNet& enc = *k.spec().encoder;
      const Index d = particles.cols();
      const Index h = embedded.cols();
      Matrix a(n, d);               // rows: J_j^T u_j
      std::vector<Matrix> bt(static_cast<size_t>(h), Matrix(n, d));  // rows: J_j^T e_t
      for (Index j = 0; j < n; ++j) {
        const Matrix jac = enc.jacobian(particles.row(j).transpose(), k.sigma());  // h x d
        a.row(j) = (jac.transpose() * embedded.row(j).transpose()).transpose();
        for (Index t = 0; t < h; ++t)
          bt[static_cast<size_t>(t)].row(j) = jac.row(t);
      }
      Matrix rep = dcoeff.transpose() * a;  // sum_j c_ij J_j^T u_j  (c symmetric)
      for (Index t = 0; t < h; ++t) {
        const Matrix ct = dcoeff.transpose() * bt[static_cast<size_t>(t)];
        rep.array() -= ct.array().colwise() * embedded.col(t).array();
      }
      phi.noalias() += beta * rep;
    }
  }
  return phi * inv_n;
}

Vector stein_direction(const Eigen::Ref<const Matrix>& particles, const ConditionedKernel& k,
                       const ScoreSource& s, Scalar sigma, Scalar beta, Index at) {
  validate_particles(particles, "stein_direction");
  const Index n = particles.rows();
  require(at >= 0 && at < n, "stein_direction: particle index out of range");
  const Matrix scores = s(particles, sigma);
  check_scores(scores, "stein_direction");

  const Vector x_at = particles.row(at).transpose();
  Vector phi = Vector::Zero(particles.cols());
  for (Index j = 0; j < n; ++j) {
    const Vector x_j = particles.row(j).transpose();
    phi += k.eval(x_j, x_at) * scores.row(j).transpose();
    if (beta != 0.0) phi += beta * k.grad_x(x_j, x_at);
  }
  return phi / static_cast<Scalar>(n);
}

ParticleSet svgd_step(const Eigen::Ref<const Matrix>& particles, const ConditionedKernel& k,
                      const ScoreSource& s, Scalar sigma, Scalar beta, Scalar eta) {
  require(std::isfinite(eta) && eta > 0.0, "svgd_step: eta must be positive");
  return particles + eta * stein_directions(particles, k, s, sigma, beta);
}

ParticleSet sgld_step(const Eigen::Ref<const Matrix>& particles, const ScoreSource& s,
                      Scalar sigma, Scalar eta, Scalar alpha, Rng& rng) {
  require(std::isfinite(eta) && eta > 0.0, "sgld_step: eta must be positive");
  require(std::isfinite(alpha) && alpha >= 0.0, "sgld_step: alpha must be nonnegative");
  validate_particles(particles, "sgld_step");
  const Matrix scores = s(particles, sigma);
  check_scores(scores, "sgld_step");
  ParticleSet next = particles + (0.5 * eta) * scores;
  if (alpha > 0.0) {
    const Rng step_base(rng.bits());  // advance the master stream once per step
    const Scalar noise_scale = alpha * std::sqrt(eta);
    const Index d = particles.cols();
    for (Index i = 0; i < particles.rows(); ++i) {
      Rng pr = step_base.child(static_cast<std::uint64_t>(i));
      next.row(i) += noise_scale * pr.normal_vector(d).transpose();
    }
  }
  return next;
}

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return mix64(seed ^ mix64(stream ^ mix64(counter)));
}

void check_particles_sane(const Matrix& x, Scalar limit, Index level, int iter) {
  const bool finite = x.allFinite();
  if (finite && x.cwiseAbs().maxCoeff() <= limit) return;
  std::ostringstream msg;
  msg << "anneal: " << (finite ? "diverging" : "non-finite")
      << " particles at level " << level << ", iteration " << iter
      << " (|x|_max " << (finite ? x.cwiseAbs().maxCoeff() : std::nan("")) << ")";
  throw std::runtime_error(msg.str());
}

}  // namespace

AnnealResult anneal(LoopKind kind, const NoiseSchedule& schedule, const SamplerConfig& cfg,
                    const std::optional<KernelSpec>& kernel_spec, const ScoreSource& score,
                    const ParticleSet& init, const AnnealOptions& opts) {
  cfg.validate();
  validate_particles(init, "anneal");
  require(init.rows() == cfg.n, "anneal: init must hold cfg.n particles");
  const Index levels = schedule.levels();
  const bool wants_svgd = kind == LoopKind::kSvgd;
  if (wants_svgd)
    require(kernel_spec.has_value(), "anneal: SVGD loop requires a kernel spec");
  if (!opts.tau_per_level.empty())
    require(static_cast<Index>(opts.tau_per_level.size()) == levels,
            "anneal: tau_per_level must match the schedule length");
  if (wants_svgd && !opts.noise_conditional_kernel)
    require(opts.fixed_reference.has_value(),
            "anneal: fixed-kernel run needs a fixed_reference sample");

  MedianReference ref_policy = opts.median_reference;
  if (ref_policy == MedianReference::kAuto)
    ref_policy = score.analytic_target() != nullptr ? MedianReference::kAnalytic
                                                    : MedianReference::kParticles;
  if (ref_policy == MedianReference::kAnalytic)
    require(score.analytic_target() != nullptr,
            "anneal: analytic median reference needs an analytic score source");

  const Scalar sigma_last = schedule.last();
  AnnealResult result;
  result.particles = init;
  Rng sgld_rng(derive_seed(cfg.seed, 0x51677d, 0));

  for (Index level = 0; level < levels; ++level) {
    const Scalar sig = schedule.sigma(level);
    const Scalar eta = cfg.epsilon * (sig / sigma_last) * (sig / sigma_last);
    const bool svgd_level = wants_svgd && level >= opts.switch_level;
    std::optional<ConditionedKernel> kern;
    if (svgd_level) {
      std::optional<Scalar> tau_override;
      if (!opts.tau_per_level.empty())
        tau_override = opts.tau_per_level[static_cast<size_t>(level)];
      if (!opts.noise_conditional_kernel) {
        kern = condition(*kernel_spec, sig, *opts.fixed_reference, tau_override);
      } else {
        Matrix reference;
        if (ref_policy == MedianReference::kAnalytic) {
          reference = score.analytic_target()->perturbed(sig).sample(
              opts.reference_n, derive_seed(cfg.seed, 0x8ef5eedULL, static_cast<std::uint64_t>(level)));
        } else {
          reference = result.particles;
        }
        kern = condition(*kernel_spec, sig, reference, tau_override);
      }
    }
    for (int t = 0; t < cfg.iters; ++t) {
      if (svgd_level)
        result.particles = svgd_step(result.particles, *kern, score, sig, cfg.beta, eta);
      else
        result.particles = sgld_step(result.particles, score, sig, eta, cfg.alpha, sgld_rng);
      check_particles_sane(result.particles, opts.divergence_norm, level, t);
    }
    if (opts.record_trace)
      result.trace.push_back({level, sig, eta, svgd_level ? kern->gamma() : 0.0,
                              result.particles});
  }
  return result;
}

ParticleSet init_particles(const InitSpec& spec, Index n, Index d, std::uint64_t seed) {
  require(n >= 1, "init_particles: n must be >= 1");
  switch (spec.mode) {
    case InitMode::kUniformBox: {
      require(spec.lo < spec.hi, "init_particles: box bounds must satisfy lo < hi");
      Rng rng(seed);
      Matrix x(n, d);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) x(i, j) = rng.uniform(spec.lo, spec.hi);
      return x;
    }
    case InitMode::kGaussian: {
      require(spec.scale >= 0.0, "init_particles: gaussian scale must be nonnegative");
      Rng rng(seed);
      Matrix x(n, d);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) x(i, j) = spec.scale * rng.normal();
      return x;
    }
    case InitMode::kFromFile: {
      const ParticleFile file = read_particles(spec.path);
      require(file.particles.rows() == n && file.particles.cols() == d,
              "init_particles: particle file shape does not match request");
      return file.particles;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace nck
