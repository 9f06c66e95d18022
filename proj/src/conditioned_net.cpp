#include "nck/conditioned_net.hpp"

#include <cmath>

namespace nck {

ConditionedNet::ConditionedNet(FeedforwardNet net, NoiseConditioning cond)
    : net_(std::move(net)), cond_(cond) {
  if (cond_.method == ConditioningMethod::kConcatLogSigma)
    require(net_.input_dim() >= 2, "ConditionedNet: conditioned net needs input_dim >= 2");
}

Index ConditionedNet::data_dim() const {
  return cond_.method == ConditioningMethod::kConcatLogSigma ? net_.input_dim() - 1
                                                             : net_.input_dim();
}

Matrix ConditionedNet::lift(const Matrix& x, const Vector& sigmas) const {
  require(x.rows() == data_dim(), "ConditionedNet: input dimension mismatch");
  require(sigmas.size() == x.cols(), "ConditionedNet: one sigma per column required");
  require((sigmas.array() > 0.0).all(), "ConditionedNet: sigma must be positive");
  if (cond_.method == ConditioningMethod::kNone) return x;
  Matrix lifted(x.rows() + 1, x.cols());
  lifted.topRows(x.rows()) = x;
  lifted.bottomRows(1) = sigmas.array().log().matrix().transpose();
  return lifted;
}

Matrix ConditionedNet::apply(const Matrix& x, Scalar sigma) const {
  return apply(x, Vector::Constant(x.cols(), sigma), nullptr);
}

Matrix ConditionedNet::apply(const Matrix& x, const Vector& sigmas) const {
  return apply(x, sigmas, nullptr);
}

Matrix ConditionedNet::apply(const Matrix& x, const Vector& sigmas, Cache* cache) const {
  const Matrix lifted = lift(x, sigmas);
  Matrix out = cache ? net_.forward(lifted, &cache->inner) : net_.forward(lifted);
  if (cache) cache->sigmas = sigmas;
  if (cond_.normalization == OutputScale::kInvSigma)
    out.array().rowwise() /= sigmas.transpose().array();
  return out;
}

Matrix ConditionedNet::backward(const Cache& cache, const Matrix& upstream,
                                Vector* param_grad) const {
  Matrix up = upstream;
  if (cond_.normalization == OutputScale::kInvSigma)
    up.array().rowwise() /= cache.sigmas.transpose().array();
  const Matrix in_grad = net_.backward(cache.inner, up, param_grad);
  return in_grad.topRows(data_dim());
}

Matrix ConditionedNet::jacobian(const Vector& x, Scalar sigma) const {
  Cache cache;
  apply(x, Vector::Constant(1, sigma), &cache);
  const Index out = output_dim();
  Matrix jac(out, data_dim());
  Matrix upstream = Matrix::Zero(out, 1);
  for (Index k = 0; k < out; ++k) {
    upstream(k, 0) = 1.0;
    jac.row(k) = backward(cache, upstream, nullptr).col(0).transpose();
    upstream(k, 0) = 0.0;
  }
  return jac;
}

}  // namespace nck
