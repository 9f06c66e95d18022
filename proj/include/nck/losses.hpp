#pragma once

#include "nck/conditioned_net.hpp"
#include "nck/rng.hpp"
#include "nck/sampler.hpp"

namespace nck {

struct LossGrad {
  Scalar loss;
  Vector grad;  // flat, matching FeedforwardNet::params()
};

struct AutoencoderLossGrad {
  Scalar loss;
  Vector enc_grad;
  Vector dec_grad;
};

/// Denoising score matching at a single noise level:
/// 0.5 * mean_i | s(x_i + sigma z_i; sigma) - (-z_i / sigma) |^2
/// with the exact parameter gradient. Deterministic given the rng state.
LossGrad dsm_loss(const ConditionedNet& net, const Eigen::Ref<const Matrix>& batch,
                  Scalar sigma, Rng& rng);

/// Multi-level objective: each batch element draws one level uniformly and
/// contributes sigma_l^2 times its denoising term, an unbiased estimator of
/// the scale-balanced sum over levels. A single-level schedule collapses
/// exactly to sigma^2 * dsm_loss.
LossGrad ncsn_loss(const ConditionedNet& net, const Eigen::Ref<const Matrix>& batch,
                   const NoiseSchedule& schedule, Rng& rng);

/// Noise-conditional autoencoder reconstruction:
/// 0.5 * mean_i |D(E(x~_i, sigma_l), sigma_l) - x_i|^2 / sigma_l^2,
/// levels drawn per element; returns gradients for both networks.
AutoencoderLossGrad ncae_loss(const ConditionedNet& enc, const ConditionedNet& dec,
                              const Eigen::Ref<const Matrix>& batch,
                              const NoiseSchedule& schedule, Rng& rng);

/// Exact sliced-free score matching objective
/// mean_i [ tr(dx s(x_i)) + 0.5 |s(x_i)|^2 ]
/// with the exact parameter gradient (reverse pass over the forward tangent
/// recursion). Cost grows with d; intended for small dimensions.
LossGrad score_matching_loss(const FeedforwardNet& net, const Eigen::Ref<const Matrix>& batch);

}  // namespace nck
