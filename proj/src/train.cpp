#include "nck/train.hpp"

#include <cmath>
#include <sstream>

namespace nck {

Objective objective_from_string(const std::string& s) {
  if (s == "dsm") return Objective::kDsm;
  if (s == "ncsn") return Objective::kNcsn;
  if (s == "ncae") return Objective::kNcae;
  throw std::invalid_argument("unknown objective: " + s);
}

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "adam") return OptimizerKind::kAdam;
  throw std::invalid_argument("unknown optimizer: " + s);
}

void TrainConfig::validate() const {
  require(batch_size >= 1, "TrainConfig: batch_size must be >= 1");
  require(steps >= 1, "TrainConfig: steps must be >= 1");
  require(std::isfinite(learning_rate) && learning_rate > 0.0,
          "TrainConfig: learning_rate must be positive");
  require(final_learning_rate >= 0.0 && final_learning_rate <= learning_rate,
          "TrainConfig: final_learning_rate must lie in [0, learning_rate]");
  require(dsm_sigma > 0.0, "TrainConfig: dsm_sigma must be positive");
}

Scalar TrainConfig::rate_at(int step) const {
  if (final_learning_rate <= 0.0 || steps <= 1) return learning_rate;
  const Scalar frac = static_cast<Scalar>(step) / static_cast<Scalar>(steps - 1);
  return learning_rate * std::pow(final_learning_rate / learning_rate, frac);
}

BatchSource mixture_batches(GaussianMixture gm) {
  return [gm = std::move(gm)](Index count, Rng& rng) {
    return gm.sample(count, rng.bits());
  };
}

BatchSource dataset_batches(Matrix data) {
  require(data.rows() >= 1, "dataset_batches: empty dataset");
  return [data = std::move(data)](Index count, Rng& rng) {
    Matrix batch(count, data.cols());
    for (Index i = 0; i < count; ++i)
      batch.row(i) = data.row(static_cast<Index>(
          rng.uniform_index(static_cast<std::uint64_t>(data.rows()))));
    return batch;
  };
}

void AdamState::step(Vector& params, const Vector& grad, Scalar lr) {
  constexpr Scalar beta1 = 0.9;
  constexpr Scalar beta2 = 0.999;
  constexpr Scalar eps = 1e-8;
  if (m_.size() != grad.size()) {
    m_ = Vector::Zero(grad.size());
    v_ = Vector::Zero(grad.size());
    t_ = 0;
  }
  ++t_;
  m_ = beta1 * m_ + (1.0 - beta1) * grad;
  v_ = beta2 * v_ + (1.0 - beta2) * grad.cwiseProduct(grad);
  const Scalar bc1 = 1.0 - std::pow(beta1, static_cast<Scalar>(t_));
  const Scalar bc2 = 1.0 - std::pow(beta2, static_cast<Scalar>(t_));
  params.array() -=
      lr * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + eps);
}

namespace {

void check_loss(Scalar loss, int step) {
  if (std::isfinite(loss)) return;
  std::ostringstream msg;
  msg << "training aborted: non-finite loss at step " << step;
  throw std::runtime_error(msg.str());
}

}  // namespace

TrainResult train_score(ConditionedNet& net, Objective objective, const BatchSource& data,
                        const NoiseSchedule& schedule, const TrainConfig& cfg) {
  cfg.validate();
  require(objective == Objective::kDsm || objective == Objective::kNcsn,
          "train_score: objective must be dsm or ncsn");
  Rng rng(cfg.seed);
  Vector params = net.net().params();
  AdamState adam;
  TrainResult result;
  result.losses.reserve(static_cast<size_t>(cfg.steps));
  for (int step = 0; step < cfg.steps; ++step) {
    const Matrix batch = data(cfg.batch_size, rng);
    const LossGrad lg = objective == Objective::kDsm
                            ? dsm_loss(net, batch, cfg.dsm_sigma, rng)
                            : ncsn_loss(net, batch, schedule, rng);
    check_loss(lg.loss, step);
    result.losses.push_back(lg.loss);
    const Scalar rate = cfg.rate_at(step);
    if (cfg.optimizer == OptimizerKind::kAdam)
      adam.step(params, lg.grad, rate);
    else
      params -= rate * lg.grad;
    net.net().set_params(params);
  }
  return result;
}

TrainResult train_autoencoder(ConditionedNet& enc, ConditionedNet& dec,
                              const BatchSource& data, const NoiseSchedule& schedule,
                              const TrainConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  Vector enc_params = enc.net().params();
  Vector dec_params = dec.net().params();
  AdamState enc_adam, dec_adam;
  TrainResult result;
  result.losses.reserve(static_cast<size_t>(cfg.steps));
  for (int step = 0; step < cfg.steps; ++step) {
    const Matrix batch = data(cfg.batch_size, rng);
    const AutoencoderLossGrad lg = ncae_loss(enc, dec, batch, schedule, rng);
    check_loss(lg.loss, step);
    result.losses.push_back(lg.loss);
    const Scalar rate = cfg.rate_at(step);
    if (cfg.optimizer == OptimizerKind::kAdam) {
      enc_adam.step(enc_params, lg.enc_grad, rate);
      dec_adam.step(dec_params, lg.dec_grad, rate);
    } else {
      enc_params -= rate * lg.enc_grad;
      dec_params -= rate * lg.dec_grad;
    }
    enc.net().set_params(enc_params);
    dec.net().set_params(dec_params);
  }
  return result;
}

}  // namespace nck
