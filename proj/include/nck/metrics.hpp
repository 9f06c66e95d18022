#pragma once

#include <optional>

#include "nck/gaussian_mixture.hpp"
#include "nck/kernel.hpp"
#include "nck/score_source.hpp"

namespace nck {

struct MmdOptions {
  /// Bandwidth: RBF kernel exp(-|x-y|^2 / med^2) with med the median
  /// pairwise distance of the pooled sample, or a fixed gamma for
  /// exp(-gamma |x-y|^2).
  std::optional<Scalar> fixed_gamma;
  bool biased = false;  // V-statistic instead of the unbiased U-statistic
};

/// Squared maximum mean discrepancy between two samples (unbiased
/// U-statistic by default).
Scalar mmd_squared(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y,
                   const MmdOptions& opts = {});

/// Squared kernel Stein discrepancy of the sample against the score of the
/// target at noise level sigma: U-statistic over the Stein kernel
///   u(x,y) = s(x)^T s(y) k + s(x)^T grad_y k + s(y)^T grad_x k + tr(dxdy k).
/// Data-space kernels use closed-form traces; code-space kernels fall back
/// to a finite-difference trace and are intended for small n only.
Scalar ksd_squared(const Eigen::Ref<const Matrix>& x, const ScoreSource& s, Scalar sigma,
                   const ConditionedKernel& k);

struct PrResult {
  Scalar precision;
  Scalar recall;
};

/// Improved precision/recall against k-nearest-neighbor manifolds:
/// manifold(A) = union of balls at each a with radius = distance to a's
/// k-th nearest neighbor inside A; boundary points count as inside.
PrResult improved_pr(const Eigen::Ref<const Matrix>& real, const Eigen::Ref<const Matrix>& gen,
                     int k_neighbors = 3);

struct OccupancyResult {
  Vector fractions;      // per-component, sums to 1
  bool well_separated;   // pairwise mean distance > 6 * max std
};

/// Nearest-component-mean assignment fractions.
OccupancyResult mode_occupancy(const Eigen::Ref<const Matrix>& x, const GaussianMixture& gm);

}  // namespace nck
