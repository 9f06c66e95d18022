#include "nck/gaussian_mixture.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "nck/rng.hpp"

namespace nck {

namespace {
constexpr Scalar kLog2Pi = 1.8378770664093454836;  // log(2*pi)
}

GaussianMixture::GaussianMixture(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  require(!components_.empty(), "GaussianMixture: at least one component required");
  dim_ = components_.front().mean.size();
  Scalar total = 0.0;
  for (const auto& c : components_) {
    require(c.mean.size() == dim_, "GaussianMixture: component dimension mismatch");
    require(c.mean.allFinite(), "GaussianMixture: non-finite component mean");
    require(std::isfinite(c.variance) && c.variance > 0.0,
            "GaussianMixture: component variance must be positive");
    require(std::isfinite(c.weight) && c.weight >= 0.0,
            "GaussianMixture: component weight must be nonnegative");
    total += c.weight;
  }
  require(total > 0.0, "GaussianMixture: weights must not all be zero");
  weights_.resize(size());
  log_weights_.resize(size());
  for (Index i = 0; i < size(); ++i) {
    weights_[i] = components_[static_cast<size_t>(i)].weight / total;
    log_weights_[i] = weights_[i] > 0.0 ? std::log(weights_[i])
                                        : -std::numeric_limits<Scalar>::infinity();
  }
}

Matrix GaussianMixture::component_log_terms(const Eigen::Ref<const Matrix>& xs) const {
  require(xs.cols() == dim_, "GaussianMixture: point dimension mismatch");
  require(xs.allFinite(), "GaussianMixture: non-finite evaluation point");
  const Index n = xs.rows();
  const Index k = size();
  Matrix terms(n, k);
  const Scalar d = static_cast<Scalar>(dim_);
  for (Index i = 0; i < k; ++i) {
    const auto& c = components_[static_cast<size_t>(i)];
    const Scalar log_norm = -0.5 * d * (kLog2Pi + std::log(c.variance));
    terms.col(i) = (xs.rowwise() - c.mean.transpose()).rowwise().squaredNorm() *
                       (-0.5 / c.variance) +
                   Vector::Constant(n, log_weights_[i] + log_norm);
  }
  return terms;
}

Vector GaussianMixture::log_densities(const Eigen::Ref<const Matrix>& xs) const {
  const Matrix terms = component_log_terms(xs);
  const Vector row_max = terms.rowwise().maxCoeff();
  return row_max.array() +
         (terms.colwise() - row_max).array().exp().rowwise().sum().log();
}

Scalar GaussianMixture::log_density(const Vector& x) const {
  return log_densities(x.transpose())[0];
}

Matrix GaussianMixture::responsibilities(const Eigen::Ref<const Matrix>& xs) const {
  const Matrix terms = component_log_terms(xs);
  const Vector row_max = terms.rowwise().maxCoeff();
  Matrix r = (terms.colwise() - row_max).array().exp();
  r.array().colwise() /= r.rowwise().sum().array();
  return r;
}

Matrix GaussianMixture::scores(const Eigen::Ref<const Matrix>& xs) const {
  const Matrix r = responsibilities(xs);
  const Index k = size();
  Matrix mean_over_var(k, dim_);
  Vector inv_var(k);
  for (Index i = 0; i < k; ++i) {
    const auto& c = components_[static_cast<size_t>(i)];
    inv_var[i] = 1.0 / c.variance;
    mean_over_var.row(i) = c.mean.transpose() * inv_var[i];
  }
  // sum_i r_i (mu_i - x) / v_i = R (mu/v) - x .* (R * 1/v)
  const Matrix pull = r * mean_over_var;
  const Vector shrink = r * inv_var;
  return pull - (xs.array().colwise() * shrink.array()).matrix();
}

Vector GaussianMixture::score(const Vector& x) const {
  return scores(x.transpose()).row(0).transpose();
}

GaussianMixture GaussianMixture::perturbed(Scalar sigma) const {
  require(std::isfinite(sigma) && sigma > 0.0, "perturbed: sigma must be positive");
  std::vector<MixtureComponent> comps = components_;
  for (auto& c : comps) c.variance += sigma * sigma;
  return GaussianMixture(std::move(comps));
}

Matrix GaussianMixture::sample(Index n, std::uint64_t seed) const {
  require(n >= 1, "sample: n must be >= 1");
  Rng rng(seed);
  Matrix out(n, dim_);
  Vector cum(size());
  Scalar acc = 0.0;
  for (Index i = 0; i < size(); ++i) {
    acc += weights_[i];
    cum[i] = acc;
  }
  for (Index r = 0; r < n; ++r) {
    const Scalar u = rng.uniform();
    Index pick = size() - 1;
    for (Index i = 0; i < size(); ++i) {
      if (u < cum[i]) {
        pick = i;
        break;
      }
    }
    const auto& c = components_[static_cast<size_t>(pick)];
    const Scalar sd = std::sqrt(c.variance);
    for (Index j = 0; j < dim_; ++j) out(r, j) = c.mean[j] + sd * rng.normal();
  }
  return out;
}

}  // namespace nck
