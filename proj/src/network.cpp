#include "nck/network.hpp"

#include <cmath>

#include "nck/rng.hpp"

namespace nck {

namespace {

Scalar softplus(Scalar z) {
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

Scalar sigmoid(Scalar z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::kIdentity;
  if (s == "softplus") return Activation::kSoftplus;
  if (s == "tanh") return Activation::kTanh;
  throw std::invalid_argument("unknown activation: " + s);
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kSoftplus: return "softplus";
    case Activation::kTanh: return "tanh";
  }
  throw std::logic_error("unreachable");
}

Matrix act_value(Activation a, const Matrix& z) {
  switch (a) {
    case Activation::kIdentity: return z;
    case Activation::kSoftplus: return z.unaryExpr([](Scalar v) { return softplus(v); });
    case Activation::kTanh: return z.array().tanh();
  }
  throw std::logic_error("unreachable");
}

Matrix act_deriv(Activation a, const Matrix& z) {
  switch (a) {
    case Activation::kIdentity: return Matrix::Ones(z.rows(), z.cols());
    case Activation::kSoftplus: return z.unaryExpr([](Scalar v) { return sigmoid(v); });
    case Activation::kTanh: return 1.0 - z.array().tanh().square();
  }
  throw std::logic_error("unreachable");
}

Matrix act_deriv2(Activation a, const Matrix& z) {
  switch (a) {
    case Activation::kIdentity: return Matrix::Zero(z.rows(), z.cols());
    case Activation::kSoftplus:
      return z.unaryExpr([](Scalar v) {
        const Scalar s = sigmoid(v);
        return s * (1.0 - s);
      });
    case Activation::kTanh: {
      const Eigen::ArrayXXd t = z.array().tanh();
      return -2.0 * t * (1.0 - t.square());
    }
  }
  throw std::logic_error("unreachable");
}

FeedforwardNet::FeedforwardNet(std::vector<Layer> layers) : layers_(std::move(layers)) {
  require(!layers_.empty(), "FeedforwardNet: at least one layer required");
  for (size_t l = 0; l < layers_.size(); ++l) {
    const auto& lay = layers_[l];
    require(lay.weight.rows() == lay.bias.size(),
            "FeedforwardNet: bias length must match weight rows");
    if (l > 0)
      require(lay.weight.cols() == layers_[l - 1].weight.rows(),
              "FeedforwardNet: consecutive layer dimensions must chain");
  }
}

FeedforwardNet FeedforwardNet::init(const std::vector<Index>& dims,
                                    const std::vector<Activation>& acts,
                                    std::uint64_t seed) {
  require(dims.size() >= 2, "FeedforwardNet::init: need input and output dims");
  require(acts.size() == dims.size() - 1, "FeedforwardNet::init: one activation per layer");
  Rng rng(seed);
  std::vector<Layer> layers;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const Index fan_in = dims[l];
    const Index fan_out = dims[l + 1];
    const Scalar scale = std::sqrt(2.0 / static_cast<Scalar>(fan_in + fan_out));
    Layer lay;
    lay.weight = rng.normal_matrix(fan_out, fan_in) * scale;
    lay.bias = Vector::Zero(fan_out);
    lay.act = acts[l];
    layers.push_back(std::move(lay));
  }
  return FeedforwardNet(std::move(layers));
}

Matrix FeedforwardNet::forward(const Matrix& x) const {
  require(x.rows() == input_dim(), "FeedforwardNet: input dimension mismatch");
  Matrix h = x;
  for (const auto& lay : layers_) {
    Matrix z = (lay.weight * h).colwise() + lay.bias;
    h = act_value(lay.act, z);
  }
  return h;
}

Matrix FeedforwardNet::forward(const Matrix& x, Cache* cache) const {
  if (cache == nullptr) return forward(x);
  require(x.rows() == input_dim(), "FeedforwardNet: input dimension mismatch");
  cache->h.assign(1, x);
  cache->z.clear();
  for (const auto& lay : layers_) {
    cache->z.push_back((lay.weight * cache->h.back()).colwise() + lay.bias);
    cache->h.push_back(act_value(lay.act, cache->z.back()));
  }
  return cache->h.back();
}

Matrix FeedforwardNet::backward(const Cache& cache, const Matrix& upstream,
                                Vector* param_grad) const {
  const Index depth_n = depth();
  require(cache.z.size() == static_cast<size_t>(depth_n),
          "FeedforwardNet::backward: stale cache");
  require(upstream.rows() == output_dim() && upstream.cols() == cache.h[0].cols(),
          "FeedforwardNet::backward: upstream shape mismatch");
  if (param_grad != nullptr && param_grad->size() != param_count())
    param_grad->setZero(param_count());

  Matrix delta = upstream;
  Index offset = param_grad ? param_count() : 0;
  for (Index l = depth_n - 1; l >= 0; --l) {
    const auto& lay = layers_[static_cast<size_t>(l)];
    const Matrix dz = act_deriv(lay.act, cache.z[static_cast<size_t>(l)]).cwiseProduct(delta);
    if (param_grad != nullptr) {
      const Index wn = lay.weight.size();
      const Index bn = lay.bias.size();
      offset -= wn + bn;
      Eigen::Map<Matrix> dw(param_grad->data() + offset, lay.weight.rows(), lay.weight.cols());
      dw.noalias() += dz * cache.h[static_cast<size_t>(l)].transpose();
      Eigen::Map<Vector> db(param_grad->data() + offset + wn, bn);
      db.noalias() += dz.rowwise().sum();
    }
    delta = lay.weight.transpose() * dz;
  }
  return delta;
}

Matrix FeedforwardNet::jacobian(const Vector& x) const {
  Cache cache;
  forward(x, &cache);
  const Index out = output_dim();
  Matrix jac(out, input_dim());
  Matrix upstream = Matrix::Zero(out, 1);
  for (Index k = 0; k < out; ++k) {
    upstream(k, 0) = 1.0;
    jac.row(k) = backward(cache, upstream, nullptr).col(0).transpose();
    upstream(k, 0) = 0.0;
  }
  return jac;
}

Index FeedforwardNet::param_count() const {
  Index n = 0;
  for (const auto& lay : layers_) n += lay.weight.size() + lay.bias.size();
  return n;
}

Vector FeedforwardNet::params() const {
  Vector p(param_count());
  Index offset = 0;
  for (const auto& lay : layers_) {
    Eigen::Map<const Vector> w(lay.weight.data(), lay.weight.size());
    p.segment(offset, lay.weight.size()) = w;
    offset += lay.weight.size();
    p.segment(offset, lay.bias.size()) = lay.bias;
    offset += lay.bias.size();
  }
  return p;
}

void FeedforwardNet::set_params(const Eigen::Ref<const Vector>& p) {
  require(p.size() == param_count(), "set_params: parameter count mismatch");
  Index offset = 0;
  for (auto& lay : layers_) {
    Eigen::Map<Matrix>(lay.weight.data(), lay.weight.rows(), lay.weight.cols()) =
        Eigen::Map<const Matrix>(p.data() + offset, lay.weight.rows(), lay.weight.cols());
    offset += lay.weight.size();
    lay.bias = p.segment(offset, lay.bias.size());
    offset += lay.bias.size();
  }
}

}  // namespace nck
