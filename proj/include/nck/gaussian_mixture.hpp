#pragma once

#include <cstdint>
#include <vector>

#include "nck/types.hpp"

namespace nck {

struct MixtureComponent {
  Scalar weight;    // nonnegative; normalized internally before evaluation
  Vector mean;      // length d
  Scalar variance;  // isotropic covariance variance * I, > 0
};

/// Mixture of isotropic Gaussians with exact density, score and
/// Gaussian-convolution closure. Raw weights are kept as given; every
/// evaluation uses weights normalized by their sum.
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<MixtureComponent> components);

  Index dim() const { return dim_; }
  Index size() const { return static_cast<Index>(components_.size()); }
  const std::vector<MixtureComponent>& components() const { return components_; }

  /// Normalized weights (raw weights divided by their sum).
  const Vector& weights() const { return weights_; }

  /// log p(x) via log-sum-exp over component log densities.
  Scalar log_density(const Vector& x) const;
  Vector log_densities(const Eigen::Ref<const Matrix>& xs) const;  // one row per point

  /// Exact score grad_x log p(x) = sum_i r_i(x) (mu_i - x) / v_i with
  /// posterior responsibilities r_i.
  Vector score(const Vector& x) const;
  Matrix scores(const Eigen::Ref<const Matrix>& xs) const;  // row-wise

  /// Posterior responsibilities r_i(x), one row per input point.
  Matrix responsibilities(const Eigen::Ref<const Matrix>& xs) const;

  /// Convolution with N(0, sigma^2 I): each component variance becomes
  /// v_i + sigma^2; weights and means are unchanged.
  GaussianMixture perturbed(Scalar sigma) const;

  /// n i.i.d. draws (component by normalized weight, then Gaussian).
  /// Deterministic given seed.
  Matrix sample(Index n, std::uint64_t seed) const;

 private:
  // Per-point component log densities log(w_i) + log N(x; mu_i, v_i I),
  // one row per point, one column per component.
  Matrix component_log_terms(const Eigen::Ref<const Matrix>& xs) const;

  std::vector<MixtureComponent> components_;
  Index dim_;
  Vector weights_;      // normalized
  Vector log_weights_;  // log of normalized weights (-inf for zero weight)
};

}  // namespace nck
