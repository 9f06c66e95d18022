#pragma once

#include <cstdint>
#include <vector>

#include "nck/types.hpp"

namespace nck {

// Activations are smooth everywhere so kernel gradients through encoders
// and Jacobian traces exist at every point.
enum class Activation { kIdentity, kSoftplus, kTanh };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

struct Layer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation act = Activation::kIdentity;
};

/// Small dense network, columns are samples. Reverse-mode gradients are
/// exact; the parameter vector view packs each layer's weight
/// (column-major) followed by its bias.
class FeedforwardNet {
 public:
  explicit FeedforwardNet(std::vector<Layer> layers);

  /// Glorot-normal weights, zero biases; deterministic given seed.
  static FeedforwardNet init(const std::vector<Index>& dims,
                             const std::vector<Activation>& acts,
                             std::uint64_t seed);

  Index input_dim() const { return layers_.front().weight.cols(); }
  Index output_dim() const { return layers_.back().weight.rows(); }
  Index depth() const { return static_cast<Index>(layers_.size()); }
  const std::vector<Layer>& layers() const { return layers_; }

  struct Cache {
    std::vector<Matrix> h;  // h[0] = input, h[l] = layer l output
    std::vector<Matrix> z;  // z[l-1] = layer l preactivation
  };

  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, Cache* cache) const;

  /// Reverse-mode pass for sum over batch columns of <output, upstream>.
  /// Returns gradients with respect to the input columns; accumulates the
  /// flat parameter gradient into param_grad when given.
  Matrix backward(const Cache& cache, const Matrix& upstream,
                  Vector* param_grad) const;

  /// Jacobian of the output with respect to a single input point (out x in).
  Matrix jacobian(const Vector& x) const;

  Index param_count() const;
  Vector params() const;
  void set_params(const Eigen::Ref<const Vector>& p);

 private:
  std::vector<Layer> layers_;
};

// Elementwise activation value / first / second derivative.
Matrix act_value(Activation a, const Matrix& z);
Matrix act_deriv(Activation a, const Matrix& z);
Matrix act_deriv2(Activation a, const Matrix& z);

}  // namespace nck
