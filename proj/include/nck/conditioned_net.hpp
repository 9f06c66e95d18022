#pragma once

#include "nck/network.hpp"

namespace nck {

/// How a network receives the active noise level.
enum class ConditioningMethod {
  kNone,            // network ignores sigma
  kConcatLogSigma,  // log(sigma) appended to the input vector
};

/// Optional per-noise output scaling.
enum class OutputScale {
  kNone,
  kInvSigma,  // network output divided by sigma
};

struct NoiseConditioning {
  ConditioningMethod method = ConditioningMethod::kConcatLogSigma;
  OutputScale normalization = OutputScale::kNone;
};

/// A FeedforwardNet plus its noise-conditioning convention. Serves as the
/// score network s(x, sigma), the kernel encoder E(x, sigma), and the
/// decoder D(code, sigma); columns are samples.
class ConditionedNet {
 public:
  ConditionedNet(FeedforwardNet net, NoiseConditioning cond);

  /// Input dimension seen by callers (excluding the conditioning slot).
  Index data_dim() const;
  Index output_dim() const { return net_.output_dim(); }

  Matrix apply(const Matrix& x, Scalar sigma) const;
  Matrix apply(const Matrix& x, const Vector& sigmas) const;

  struct Cache {
    FeedforwardNet::Cache inner;
    Vector sigmas;
  };
  Matrix apply(const Matrix& x, const Vector& sigmas, Cache* cache) const;

  /// Reverse-mode pass of sum over columns of <output, upstream>. Returns
  /// gradients with respect to the data inputs (conditioning slot dropped);
  /// accumulates the flat parameter gradient when param_grad is non-null.
  Matrix backward(const Cache& cache, const Matrix& upstream, Vector* param_grad) const;

  /// Jacobian of the output with respect to one data input (out x data_dim).
  Matrix jacobian(const Vector& x, Scalar sigma) const;

  const FeedforwardNet& net() const { return net_; }
  FeedforwardNet& net() { return net_; }
  const NoiseConditioning& conditioning() const { return cond_; }

 private:
  Matrix lift(const Matrix& x, const Vector& sigmas) const;

  FeedforwardNet net_;
  NoiseConditioning cond_;
};

}  // namespace nck
