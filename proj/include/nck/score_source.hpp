#pragma once

#include <functional>
#include <memory>

#include "nck/conditioned_net.hpp"
#include "nck/gaussian_mixture.hpp"

namespace nck {

/// Supplies s(x, sigma) for every noise level: either the exact score of a
/// (sigma-perturbed) analytic mixture, a trained score network, or an
/// arbitrary callable. Row-wise over particle sets.
class ScoreSource {
 public:
  using Fn = std::function<Matrix(const Eigen::Ref<const Matrix>&, Scalar)>;

  /// Exact scores. With auto_perturb, s(x, sigma) is the score of
  /// gm convolved with N(0, sigma^2 I); otherwise sigma is ignored.
  static ScoreSource analytic(GaussianMixture gm, bool auto_perturb = true);

  static ScoreSource learned(std::shared_ptr<const ConditionedNet> net);

  static ScoreSource custom(Fn fn);

  /// Same source with outputs multiplied by factor (the s/beta construction).
  ScoreSource scaled(Scalar factor) const;

  Matrix operator()(const Eigen::Ref<const Matrix>& xs, Scalar sigma) const;
  Vector at(const Vector& x, Scalar sigma) const;

  /// Non-null for analytic sources; used to draw kernel reference samples.
  const GaussianMixture* analytic_target() const { return gm_.get(); }

 private:
  Fn fn_;
  std::shared_ptr<const GaussianMixture> gm_;
};

}  // namespace nck
