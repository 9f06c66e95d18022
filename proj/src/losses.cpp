#include "nck/losses.hpp"

namespace nck {

LossGrad dsm_loss(const ConditionedNet& net, const Eigen::Ref<const Matrix>& batch,
                  Scalar sigma, Rng& rng) {
  require(sigma > 0.0, "dsm_loss: sigma must be positive");
  validate_particles(batch, "dsm_loss");
  require(batch.cols() == net.data_dim(), "dsm_loss: batch dimension mismatch");
  const Index m = batch.rows();
  const Index d = batch.cols();

  const Matrix x = batch.transpose();
  const Matrix z = rng.normal_matrix(d, m);
  const Matrix noisy = x + sigma * z;
  const Matrix target = -z / sigma;  // (x - x~) / sigma^2

  ConditionedNet::Cache cache;
  const Matrix out = net.apply(noisy, Vector::Constant(m, sigma), &cache);
  const Matrix residual = out - target;
  const Scalar inv_m = 1.0 / static_cast<Scalar>(m);

  LossGrad result;
  result.loss = 0.5 * inv_m * residual.squaredNorm();
  result.grad = Vector::Zero(net.net().param_count());
  net.backward(cache, residual * inv_m, &result.grad);
  return result;
}

LossGrad ncsn_loss(const ConditionedNet& net, const Eigen::Ref<const Matrix>& batch,
                   const NoiseSchedule& schedule, Rng& rng) {
  validate_particles(batch, "ncsn_loss");
  require(batch.cols() == net.data_dim(), "ncsn_loss: batch dimension mismatch");
  const Index levels = schedule.levels();
  if (levels == 1) {
    // Exact single-level collapse to sigma^2 * dsm.
    const Scalar s2 = schedule.last() * schedule.last();
    LossGrad r = dsm_loss(net, batch, schedule.last(), rng);
    r.loss *= s2;
    r.grad *= s2;
    return r;
  }

  const Index m = batch.rows();
  const Index d = batch.cols();
  Vector sigmas(m);
  for (Index i = 0; i < m; ++i)
    sigmas[i] = schedule.sigma(static_cast<Index>(rng.uniform_index(
        static_cast<std::uint64_t>(levels))));
  const Matrix x = batch.transpose();
  const Matrix z = rng.normal_matrix(d, m);
  const Matrix noisy = x + z * sigmas.asDiagonal();
  const Matrix target = -(z * sigmas.cwiseInverse().asDiagonal());

  ConditionedNet::Cache cache;
  const Matrix out = net.apply(noisy, sigmas, &cache);
  const Matrix residual = out - target;
  const Scalar inv_m = 1.0 / static_cast<Scalar>(m);
  const Vector weights = sigmas.array().square();

  LossGrad result;
  result.loss = 0.5 * inv_m *
                (residual.colwise().squaredNorm().transpose().cwiseProduct(weights)).sum();
  result.grad = Vector::Zero(net.net().param_count());
  net.backward(cache, (residual * weights.asDiagonal()) * inv_m, &result.grad);
  return result;
}

AutoencoderLossGrad ncae_loss(const ConditionedNet& enc, const ConditionedNet& dec,
                              const Eigen::Ref<const Matrix>& batch,
                              const NoiseSchedule& schedule, Rng& rng) {
  validate_particles(batch, "ncae_loss");
  require(batch.cols() == enc.data_dim(), "ncae_loss: batch dimension mismatch");
  require(enc.output_dim() == dec.data_dim(),
          "ncae_loss: encoder output must match decoder input");
  require(dec.output_dim() == batch.cols(),
          "ncae_loss: decoder output must match data dimension");

  const Index m = batch.rows();
  const Index d = batch.cols();
  const Index levels = schedule.levels();
  Vector sigmas(m);
  if (levels == 1) {
    sigmas.setConstant(schedule.last());
  } else {
    for (Index i = 0; i < m; ++i)
      sigmas[i] = schedule.sigma(static_cast<Index>(rng.uniform_index(
          static_cast<std::uint64_t>(levels))));
  }
  const Matrix x = batch.transpose();
  const Matrix z = rng.normal_matrix(d, m);
  const Matrix noisy = x + z * sigmas.asDiagonal();

  ConditionedNet::Cache enc_cache, dec_cache;
  const Matrix code = enc.apply(noisy, sigmas, &enc_cache);
  const Matrix recon = dec.apply(code, sigmas, &dec_cache);
  const Matrix residual = recon - x;
  const Scalar inv_m = 1.0 / static_cast<Scalar>(m);
  const Vector inv_var = sigmas.array().square().inverse();

  AutoencoderLossGrad result;
  result.loss = 0.5 * inv_m *
                (residual.colwise().squaredNorm().transpose().cwiseProduct(inv_var)).sum();
  result.dec_grad = Vector::Zero(dec.net().param_count());
  const Matrix code_grad =
      dec.backward(dec_cache, (residual * inv_var.asDiagonal()) * inv_m, &result.dec_grad);
  result.enc_grad = Vector::Zero(enc.net().param_count());
  enc.backward(enc_cache, code_grad, &result.enc_grad);
  return result;
}

LossGrad score_matching_loss(const FeedforwardNet& net,
                             const Eigen::Ref<const Matrix>& batch) {
  validate_particles(batch, "score_matching_loss");
  const Index d = batch.cols();
  require(net.input_dim() == d && net.output_dim() == d,
          "score_matching_loss: net must map R^d -> R^d");
  const Index m = batch.rows();
  const Index depth = net.depth();
  const Scalar inv_m = 1.0 / static_cast<Scalar>(m);
  const auto& layers = net.layers();

  // Flat-gradient layout bookkeeping (weight then bias per layer).
  std::vector<Index> offsets(static_cast<size_t>(depth));
  Index total = 0;
  for (Index l = 0; l < depth; ++l) {
    offsets[static_cast<size_t>(l)] = total;
    total += layers[static_cast<size_t>(l)].weight.size() +
             layers[static_cast<size_t>(l)].bias.size();
  }

  LossGrad result;
  result.loss = 0.0;
  result.grad = Vector::Zero(total);

  for (Index i = 0; i < m; ++i) {
    // Forward primal and tangent (tangents = the d input directions).
    std::vector<Matrix> h(static_cast<size_t>(depth) + 1);
    std::vector<Matrix> zs(static_cast<size_t>(depth));
    std::vector<Matrix> u(static_cast<size_t>(depth));
    std::vector<Matrix> v(static_cast<size_t>(depth) + 1);
    h[0] = batch.row(i).transpose();
    v[0] = Matrix::Identity(d, d);
    for (Index l = 0; l < depth; ++l) {
      const auto& lay = layers[static_cast<size_t>(l)];
      zs[static_cast<size_t>(l)] = lay.weight * h[static_cast<size_t>(l)] + lay.bias;
      h[static_cast<size_t>(l) + 1] = act_value(lay.act, zs[static_cast<size_t>(l)]);
      u[static_cast<size_t>(l)] = lay.weight * v[static_cast<size_t>(l)];
      const Matrix ad = act_deriv(lay.act, zs[static_cast<size_t>(l)]);
      v[static_cast<size_t>(l) + 1] =
          u[static_cast<size_t>(l)].array().colwise() * ad.col(0).array();
    }
    const Vector s = h[static_cast<size_t>(depth)].col(0);
    const Scalar trace = v[static_cast<size_t>(depth)].diagonal().sum();
    result.loss += inv_m * (trace + 0.5 * s.squaredNorm());

    // Reverse pass over both recursions.
    Matrix h_bar = s * inv_m;                            // d loss / d s
    Matrix v_bar = Matrix::Identity(d, d) * inv_m;       // d loss / d V_L
    for (Index l = depth - 1; l >= 0; --l) {
      const auto& lay = layers[static_cast<size_t>(l)];
      const Matrix ad = act_deriv(lay.act, zs[static_cast<size_t>(l)]);
      const Matrix ad2 = act_deriv2(lay.act, zs[static_cast<size_t>(l)]);
      const Matrix u_bar = v_bar.array().colwise() * ad.col(0).array();
      const Vector z_bar =
          (ad2.col(0).array() *
           (u[static_cast<size_t>(l)].array() * v_bar.array()).rowwise().sum())
              .matrix() +
          ad.col(0).cwiseProduct(h_bar.col(0));
      const Index off = offsets[static_cast<size_t>(l)];
      Eigen::Map<Matrix> dw(result.grad.data() + off, lay.weight.rows(), lay.weight.cols());
      dw.noalias() += z_bar * h[static_cast<size_t>(l)].transpose();
      dw.noalias() += u_bar * v[static_cast<size_t>(l)].transpose();
      Eigen::Map<Vector> db(result.grad.data() + off + lay.weight.size(), lay.bias.size());
      db.noalias() += z_bar;
      h_bar = lay.weight.transpose() * z_bar;
      v_bar = lay.weight.transpose() * u_bar;
    }
  }
  return result;
}

}  // namespace nck
