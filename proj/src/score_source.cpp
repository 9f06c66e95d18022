#include "nck/score_source.hpp"

namespace nck {

ScoreSource ScoreSource::analytic(GaussianMixture gm, bool auto_perturb) {
  ScoreSource s;
  s.gm_ = std::make_shared<const GaussianMixture>(std::move(gm));
  auto gm_ptr = s.gm_;
  if (auto_perturb) {
    s.fn_ = [gm_ptr](const Eigen::Ref<const Matrix>& xs, Scalar sigma) {
      return gm_ptr->perturbed(sigma).scores(xs);
    };
  } else {
    s.fn_ = [gm_ptr](const Eigen::Ref<const Matrix>& xs, Scalar) {
      return gm_ptr->scores(xs);
    };
  }
  return s;
}

ScoreSource ScoreSource::learned(std::shared_ptr<const ConditionedNet> net) {
  require(net != nullptr, "ScoreSource::learned: null network");
  require(net->output_dim() == net->data_dim(),
          "ScoreSource::learned: score network must map R^d -> R^d");
  ScoreSource s;
  s.fn_ = [net](const Eigen::Ref<const Matrix>& xs, Scalar sigma) {
    return net->apply(xs.transpose(), sigma).transpose();
  };
  return s;
}

ScoreSource ScoreSource::custom(Fn fn) {
  require(static_cast<bool>(fn), "ScoreSource::custom: empty callable");
  ScoreSource s;
  s.fn_ = std::move(fn);
  return s;
}

ScoreSource ScoreSource::scaled(Scalar factor) const {
  ScoreSource s;
  Fn base = fn_;
  s.fn_ = [base, factor](const Eigen::Ref<const Matrix>& xs, Scalar sigma) {
    return Matrix(factor * base(xs, sigma));
  };
  s.gm_ = gm_;
  return s;
}

Matrix ScoreSource::operator()(const Eigen::Ref<const Matrix>& xs, Scalar sigma) const {
  Matrix out = fn_(xs, sigma);
  require(out.rows() == xs.rows() && out.cols() == xs.cols(),
          "ScoreSource: score shape mismatch");
  return out;
}

Vector ScoreSource::at(const Vector& x, Scalar sigma) const {
  return (*this)(x.transpose(), sigma).row(0).transpose();
}

}  // namespace nck
