#include "nck/kernel.hpp"

#include <algorithm>
#include <cmath>

namespace nck {

KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "rbf") return KernelFamily::kRbf;
  if (s == "imq") return KernelFamily::kImq;
  if (s == "mixed") return KernelFamily::kMixed;
  throw std::invalid_argument("unknown kernel family: " + s);
}

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::kRbf: return "rbf";
    case KernelFamily::kImq: return "imq";
    case KernelFamily::kMixed: return "mixed";
  }
  throw std::logic_error("unreachable");
}

void KernelSpec::validate() const {
  require(std::isfinite(gamma0) && gamma0 > 0.0, "KernelSpec: gamma0 must be positive");
  require(std::isfinite(tau0) && tau0 < 0.0, "KernelSpec: tau0 must be negative");
  if (space == KernelSpace::kCode)
    require(encoder != nullptr, "KernelSpec: code-space kernel requires an encoder");
}

Scalar median_pairwise(const Eigen::Ref<const Matrix>& points) {
  const Index n = points.rows();
  require(n >= 2, "median_pairwise: need at least two points");
  validate_particles(points, "median_pairwise");
  std::vector<Scalar> sq;
  sq.reserve(static_cast<size_t>(n) * static_cast<size_t>(n - 1) / 2);
  const Vector norms = points.rowwise().squaredNorm();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const Scalar d2 = norms[i] + norms[j] - 2.0 * points.row(i).dot(points.row(j));
      sq.push_back(std::max(d2, 0.0));
    }
  }
  const size_t m = sq.size();
  const size_t hi = m / 2;
  Scalar median;
  if (m % 2 == 1) {
    std::nth_element(sq.begin(), sq.begin() + hi, sq.end());
    median = std::sqrt(sq[hi]);
  } else {
    std::nth_element(sq.begin(), sq.begin() + hi, sq.end());
    const Scalar upper = sq[hi];
    const Scalar lower = *std::max_element(sq.begin(), sq.begin() + hi);
    median = 0.5 * (std::sqrt(lower) + std::sqrt(upper));
  }
  require(median > 0.0, "median_pairwise: zero median (all points identical)");
  return median;
}

Matrix pairwise_sq_dists(const Eigen::Ref<const Matrix>& a,
                         const Eigen::Ref<const Matrix>& b) {
  require(a.cols() == b.cols(), "pairwise_sq_dists: dimension mismatch");
  const Vector an = a.rowwise().squaredNorm();
  const Vector bn = b.rowwise().squaredNorm();
  Matrix d2 = an.replicate(1, b.rows()) + bn.transpose().replicate(a.rows(), 1);
  d2.noalias() -= 2.0 * a * b.transpose();
  return d2.cwiseMax(0.0);
}

ConditionedKernel condition(const KernelSpec& spec, Scalar sigma,
                            const Eigen::Ref<const Matrix>& reference,
                            std::optional<Scalar> tau_override) {
  spec.validate();
  require(std::isfinite(sigma) && sigma > 0.0, "condition: sigma must be positive");
  require(reference.rows() >= 2, "condition: reference needs at least two points");
  Scalar med;
  if (spec.space == KernelSpace::kCode && spec.code_space_median) {
    const Matrix encoded =
        spec.encoder->apply(reference.transpose(), sigma).transpose();
    med = median_pairwise(encoded);
  } else {
    med = median_pairwise(reference);
  }
  const Scalar divisor =
      spec.bandwidth_rule == BandwidthRule::kMedianSqDistance ? med * med : med;
  const Scalar gamma = spec.gamma0 / divisor;
  const Scalar tau = tau_override.value_or(spec.tau0);
  require(tau < 0.0, "condition: tau must be negative");
  return ConditionedKernel(spec, sigma, gamma, tau);
}

Matrix ConditionedKernel::embed(const Eigen::Ref<const Matrix>& points) const {
  if (spec_.space == KernelSpace::kData) return points;
  return spec_.encoder->apply(points.transpose(), sigma_).transpose();
}

Matrix ConditionedKernel::value_from_r2(const Matrix& r2) const {
  const Scalar c = spec_.imq_rescale ? gamma_ : 1.0;
  switch (spec_.family) {
    case KernelFamily::kRbf: return (-gamma_ * r2.array()).exp();
    case KernelFamily::kImq: return (1.0 + c * r2.array()).pow(tau_);
    case KernelFamily::kMixed:
      return (-gamma_ * r2.array()).exp() + (1.0 + c * r2.array()).pow(tau_);
  }
  throw std::logic_error("unreachable");
}

Matrix ConditionedKernel::dcoeff_from_r2(const Matrix& r2) const {
  const Scalar c = spec_.imq_rescale ? gamma_ : 1.0;
  switch (spec_.family) {
    case KernelFamily::kRbf:
      return -2.0 * gamma_ * (-gamma_ * r2.array()).exp();
    case KernelFamily::kImq:
      return 2.0 * tau_ * c * (1.0 + c * r2.array()).pow(tau_ - 1.0);
    case KernelFamily::kMixed:
      return -2.0 * gamma_ * (-gamma_ * r2.array()).exp() +
             2.0 * tau_ * c * (1.0 + c * r2.array()).pow(tau_ - 1.0);
  }
  throw std::logic_error("unreachable");
}

Matrix ConditionedKernel::trace_from_r2(const Matrix& r2, Index dim) const {
  // trace d^2 k / du dv = -4 f''(r2) r2 - 2 f'(r2) d for k = f(|u-v|^2).
  const Scalar d = static_cast<Scalar>(dim);
  const Scalar c = spec_.imq_rescale ? gamma_ : 1.0;
  Matrix out = Matrix::Zero(r2.rows(), r2.cols());
  if (spec_.family == KernelFamily::kRbf || spec_.family == KernelFamily::kMixed) {
    const auto e = (-gamma_ * r2.array()).exp();
    out.array() += (2.0 * gamma_ * d - 4.0 * gamma_ * gamma_ * r2.array()) * e;
  }
  if (spec_.family == KernelFamily::kImq || spec_.family == KernelFamily::kMixed) {
    const auto base = 1.0 + c * r2.array();
    out.array() += -4.0 * tau_ * (tau_ - 1.0) * c * c * r2.array() * base.pow(tau_ - 2.0) -
                   2.0 * tau_ * c * d * base.pow(tau_ - 1.0);
  }
  return out;
}

Matrix ConditionedKernel::gram(const Eigen::Ref<const Matrix>& a,
                               const Eigen::Ref<const Matrix>& b) const {
  const Matrix ua = embed(a);
  const Matrix ub = embed(b);
  return value_from_r2(pairwise_sq_dists(ua, ub));
}

Scalar ConditionedKernel::eval(const Vector& x, const Vector& y) const {
  require(x.size() == y.size(), "kernel eval: dimension mismatch");
  require(x.allFinite() && y.allFinite(), "kernel eval: non-finite input");
  const Matrix ux = embed(x.transpose());
  const Matrix uy = embed(y.transpose());
  Matrix r2(1, 1);
  r2(0, 0) = (ux - uy).squaredNorm();
  return value_from_r2(r2)(0, 0);
}

Vector ConditionedKernel::grad_x(const Vector& x, const Vector& y) const {
  require(x.size() == y.size(), "kernel grad_x: dimension mismatch");
  require(x.allFinite() && y.allFinite(), "kernel grad_x: non-finite input");
  if (spec_.space == KernelSpace::kData) {
    Matrix r2(1, 1);
    r2(0, 0) = (x - y).squaredNorm();
    return dcoeff_from_r2(r2)(0, 0) * (x - y);
  }
  // Code space: chain rule through the encoder's reverse pass.
  ConditionedNet::Cache cache;
  const Vector ux =
      spec_.encoder->apply(x, Vector::Constant(1, sigma_), &cache).col(0);
  const Vector uy = spec_.encoder->apply(y, sigma_).col(0);
  Matrix r2(1, 1);
  r2(0, 0) = (ux - uy).squaredNorm();
  const Vector g_u = dcoeff_from_r2(r2)(0, 0) * (ux - uy);
  return spec_.encoder->backward(cache, g_u, nullptr).col(0);
}

}  // namespace nck
