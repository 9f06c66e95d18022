#pragma once

#include <memory>
#include <optional>

#include "nck/conditioned_net.hpp"
#include "nck/types.hpp"

namespace nck {

enum class KernelFamily { kRbf, kImq, kMixed };
enum class KernelSpace { kData, kCode };

/// How the conditioned bandwidth is resolved from the reference sample.
/// kMedianDistance divides gamma0 by the median Euclidean distance;
/// kMedianSqDistance divides by its square, which keeps the kernel's
/// effective support aligned with the reference scale at any dimension.
enum class BandwidthRule { kMedianDistance, kMedianSqDistance };

KernelFamily kernel_family_from_string(const std::string& s);
std::string to_string(KernelFamily f);

struct KernelSpec {
  KernelFamily family = KernelFamily::kRbf;
  Scalar gamma0 = 1.0;  // RBF bandwidth scale, > 0
  Scalar tau0 = -0.5;   // IMQ exponent, < 0
  KernelSpace space = KernelSpace::kData;
  std::shared_ptr<const ConditionedNet> encoder;  // required iff space == kCode
  BandwidthRule bandwidth_rule = BandwidthRule::kMedianDistance;
  bool code_space_median = false;  // compute the median on encoded references
  bool imq_rescale = false;        // apply gamma inside the IMQ distance

  void validate() const;
};

/// Median of the n(n-1)/2 pairwise Euclidean distances; even counts take
/// the mean of the two central order statistics. Throws when the median is
/// zero (all points identical) since it is about to divide a bandwidth.
Scalar median_pairwise(const Eigen::Ref<const Matrix>& points);

/// Pairwise squared Euclidean distances between rows of a and rows of b.
Matrix pairwise_sq_dists(const Eigen::Ref<const Matrix>& a,
                         const Eigen::Ref<const Matrix>& b);

/// A kernel bound to one noise level: gamma resolved from a reference
/// sample of the sigma-perturbed distribution, tau fixed (or overridden per
/// level from config). Immutable after construction.
class ConditionedKernel {
 public:
  Scalar sigma() const { return sigma_; }
  Scalar gamma() const { return gamma_; }
  Scalar tau() const { return tau_; }
  const KernelSpec& spec() const { return spec_; }

  Scalar eval(const Vector& x, const Vector& y) const;

  /// Gradient of eval with respect to the first argument.
  Vector grad_x(const Vector& x, const Vector& y) const;

  /// Gram matrix between row sets (through the encoder for code space).
  Matrix gram(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) const;

  /// Encoder image of a row set (identity in data space).
  Matrix embed(const Eigen::Ref<const Matrix>& points) const;

  // Radial views on squared distances r2 = |u - v|^2 in kernel space:
  // value_from_r2     k
  // dcoeff_from_r2    c with grad_u k = c * (u - v)
  // trace_from_r2     trace of the mixed second derivative d^2k/(du dv)
  Matrix value_from_r2(const Matrix& r2) const;
  Matrix dcoeff_from_r2(const Matrix& r2) const;
  Matrix trace_from_r2(const Matrix& r2, Index dim) const;

 private:
  friend ConditionedKernel condition(const KernelSpec&, Scalar,
                                     const Eigen::Ref<const Matrix>&,
                                     std::optional<Scalar>);
  ConditionedKernel(KernelSpec spec, Scalar sigma, Scalar gamma, Scalar tau)
      : spec_(std::move(spec)), sigma_(sigma), gamma_(gamma), tau_(tau) {}

  KernelSpec spec_;
  Scalar sigma_;
  Scalar gamma_;
  Scalar tau_;
};

/// Resolves gamma = gamma0 / median statistic of the reference sample and
/// binds sigma. The reference should hold draws from the sigma-perturbed
/// data distribution (or the current particles when none exists).
ConditionedKernel condition(const KernelSpec& spec, Scalar sigma,
                            const Eigen::Ref<const Matrix>& reference,
                            std::optional<Scalar> tau_override = std::nullopt);

}  // namespace nck
