#pragma once

#include <optional>
#include <vector>

#include "nck/kernel.hpp"
#include "nck/rng.hpp"
#include "nck/score_source.hpp"

namespace nck {

/// Strictly decreasing noise levels sigma_1 > ... > sigma_L.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(std::vector<Scalar> sigmas);

  /// Geometric sequence from sigma_first down to sigma_last.
  static NoiseSchedule geometric(Scalar sigma_first, Scalar sigma_last, Index levels);

  Index levels() const { return static_cast<Index>(sigmas_.size()); }
  Scalar sigma(Index level) const { return sigmas_.at(static_cast<size_t>(level)); }
  Scalar last() const { return sigmas_.back(); }
  const std::vector<Scalar>& sigmas() const { return sigmas_; }

 private:
  std::vector<Scalar> sigmas_;
};

struct SamplerConfig {
  Scalar epsilon = 1.0;  // base step size
  int iters = 100;       // inner iterations per level (T)
  Scalar beta = 1.0;     // entropy regularizer (SVGD family)
  Scalar alpha = 1.0;    // noise scale (SGLD family)
  Index n = 1024;        // particle count
  std::uint64_t seed = 0;

  void validate() const;
};

/// Entropy-regularized Stein direction at particle `at`:
///   (1/n) sum_j [ k(x_j, x_at) s(x_j, sigma) + beta * grad_{x_j} k(x_j, x_at) ].
/// beta = 1 recovers the standard direction.
Vector stein_direction(const Eigen::Ref<const Matrix>& particles, const ConditionedKernel& k,
                       const ScoreSource& s, Scalar sigma, Scalar beta, Index at);

/// All n directions at once (same formula, vectorized).
Matrix stein_directions(const Eigen::Ref<const Matrix>& particles, const ConditionedKernel& k,
                        const ScoreSource& s, Scalar sigma, Scalar beta);

/// Synchronous update x_i <- x_i + eta * phi_i with every direction taken
/// from the pre-update particle set.
ParticleSet svgd_step(const Eigen::Ref<const Matrix>& particles, const ConditionedKernel& k,
                      const ScoreSource& s, Scalar sigma, Scalar beta, Scalar eta);

/// Langevin update x <- x + (eta/2) s(x, sigma) + alpha sqrt(eta) z with
/// per-particle noise streams split from rng, so the result does not depend
/// on evaluation order.
ParticleSet sgld_step(const Eigen::Ref<const Matrix>& particles, const ScoreSource& s,
                      Scalar sigma, Scalar eta, Scalar alpha, Rng& rng);

enum class LoopKind { kSvgd, kSgld };

/// Which sample feeds the per-level bandwidth median.
enum class MedianReference {
  kAuto,      // analytic target if available, else current particles
  kAnalytic,  // fresh draws from perturbed(target, sigma_l); requires analytic score
  kParticles, // the current particle set
};

struct AnnealOptions {
  bool record_trace = false;
  MedianReference median_reference = MedianReference::kAuto;
  Index reference_n = 1024;
  /// Levels with index < switch_level run SGLD before the SVGD loop takes
  /// over (warm-start composition). Ignored for the SGLD loop.
  int switch_level = 0;
  /// false freezes the bandwidth to the one conditioned on fixed_reference
  /// (the fixed-kernel annealed-SVGD baseline).
  bool noise_conditional_kernel = true;
  std::optional<Matrix> fixed_reference;
  /// Optional per-level tau override (size == levels when present).
  std::vector<Scalar> tau_per_level;
  Scalar divergence_norm = 1e6;
};

struct LevelTrace {
  Index level;
  Scalar sigma;
  Scalar eta;
  Scalar gamma;  // 0 for pure SGLD levels
  Matrix particles;
};

struct AnnealResult {
  ParticleSet particles;
  std::vector<LevelTrace> trace;
};

/// Runs the annealing loop: eta_l = epsilon * (sigma_l / sigma_L)^2, kernel
/// reconditioned once per level, T inner steps per level with the level-l
/// score. Aborts with level/iteration context when particles blow up.
AnnealResult anneal(LoopKind kind, const NoiseSchedule& schedule, const SamplerConfig& cfg,
                    const std::optional<KernelSpec>& kernel_spec, const ScoreSource& score,
                    const ParticleSet& init, const AnnealOptions& opts = {});

enum class InitMode { kUniformBox, kGaussian, kFromFile };

struct InitSpec {
  InitMode mode = InitMode::kUniformBox;
  Scalar lo = -8.0;  // uniform box bounds, every coordinate
  Scalar hi = 8.0;
  Scalar scale = 1.0;  // gaussian scale
  std::string path;    // from_file source
};

ParticleSet init_particles(const InitSpec& spec, Index n, Index d, std::uint64_t seed);

}  // namespace nck
