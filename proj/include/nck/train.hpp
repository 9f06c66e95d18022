#pragma once

#include <functional>

#include "nck/losses.hpp"

namespace nck {

enum class Objective { kDsm, kNcsn, kNcae };
enum class OptimizerKind { kSgd, kAdam };

Objective objective_from_string(const std::string& s);
OptimizerKind optimizer_from_string(const std::string& s);

struct TrainConfig {
  int batch_size = 128;
  int steps = 1000;
  Scalar learning_rate = 1e-3;
  /// When positive, the rate decays geometrically from learning_rate to this
  /// value over the run; 0 keeps it constant.
  Scalar final_learning_rate = 0.0;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::uint64_t seed = 0;
  Scalar dsm_sigma = 0.1;  // only used by the single-level DSM objective

  void validate() const;
  Scalar rate_at(int step) const;
};

/// Yields a fresh batch (rows are samples) for a requested size.
using BatchSource = std::function<Matrix(Index, Rng&)>;

/// Fresh i.i.d. draws from an analytic mixture.
BatchSource mixture_batches(GaussianMixture gm);

/// Uniformly resampled rows of a fixed dataset.
BatchSource dataset_batches(Matrix data);

/// Adam with standard bias correction; state lives with the instance.
class AdamState {
 public:
  void step(Vector& params, const Vector& grad, Scalar lr);

 private:
  Vector m_, v_;
  long t_ = 0;
};

struct TrainResult {
  std::vector<Scalar> losses;  // one entry per step
};

/// Runs the optimizer on a DSM or NCSN score objective. Deterministic given
/// cfg.seed; throws with the step index when the loss turns non-finite.
TrainResult train_score(ConditionedNet& net, Objective objective, const BatchSource& data,
                        const NoiseSchedule& schedule, const TrainConfig& cfg);

/// Trains the noise-conditional autoencoder pair on the reconstruction
/// objective; both networks are updated in place.
TrainResult train_autoencoder(ConditionedNet& enc, ConditionedNet& dec,
                              const BatchSource& data, const NoiseSchedule& schedule,
                              const TrainConfig& cfg);

}  // namespace nck
