#include "nck/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace nck {

namespace {

// Sum of exp(-gamma d2) over all entries / over off-diagonal entries.
Scalar rbf_sum(const Matrix& d2, Scalar gamma, bool skip_diagonal) {
  const Matrix k = (-gamma * d2.array()).exp();
  Scalar total = k.sum();
  if (skip_diagonal) total -= k.diagonal().sum();
  return total;
}

// Deterministic content order; lets mmd2(x, y) == mmd2(y, x) hold bit-exactly
// by always evaluating the symmetric formula with the same operand roles.
bool content_less(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
  if (a.rows() != b.rows()) return a.rows() < b.rows();
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      if (a(i, j) != b(i, j)) return a(i, j) < b(i, j);
  return false;
}

}  // namespace

Scalar mmd_squared(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& y,
                   const MmdOptions& opts) {
  validate_particles(x, "mmd_squared");
  validate_particles(y, "mmd_squared");
  require(x.cols() == y.cols(), "mmd_squared: dimension mismatch");
  require(x.rows() >= 2 && y.rows() >= 2, "mmd_squared: need at least two points per sample");
  if (content_less(y, x)) return mmd_squared(y, x, opts);

  Scalar gamma;
  if (opts.fixed_gamma.has_value()) {
    require(*opts.fixed_gamma > 0.0, "mmd_squared: fixed gamma must be positive");
    gamma = *opts.fixed_gamma;
  } else {
    Matrix pooled(x.rows() + y.rows(), x.cols());
    pooled << x, y;
    const Scalar med = median_pairwise(pooled);  // throws on zero median
    gamma = 1.0 / (med * med);
  }

  const Scalar m = static_cast<Scalar>(x.rows());
  const Scalar n = static_cast<Scalar>(y.rows());
  const Matrix dxx = pairwise_sq_dists(x, x);
  const Matrix dyy = pairwise_sq_dists(y, y);
  const Scalar cross = rbf_sum(pairwise_sq_dists(x, y), gamma, false) / (m * n);
  if (opts.biased) {
    return rbf_sum(dxx, gamma, false) / (m * m) + rbf_sum(dyy, gamma, false) / (n * n) -
           2.0 * cross;
  }
  return rbf_sum(dxx, gamma, true) / (m * (m - 1.0)) +
         rbf_sum(dyy, gamma, true) / (n * (n - 1.0)) - 2.0 * cross;
}

Scalar ksd_squared(const Eigen::Ref<const Matrix>& x, const ScoreSource& s, Scalar sigma,
                   const ConditionedKernel& k) {
  validate_particles(x, "ksd_squared");
  const Index n = x.rows();
  require(n >= 2, "ksd_squared: need at least two points");
  const Matrix scores = s(x, sigma);
  require(scores.allFinite(), "ksd_squared: non-finite scores");

  if (k.spec().space == KernelSpace::kData) {
    const Matrix r2 = pairwise_sq_dists(x, x);
    const Matrix kv = k.value_from_r2(r2);
    const Matrix dc = k.dcoeff_from_r2(r2);
    const Matrix tr = k.trace_from_r2(r2, x.cols());
    const Matrix ss = scores * scores.transpose();      // <s_i, s_j>
    const Matrix xs = x * scores.transpose();           // <x_i, s_j>
    const Vector q = (x.array() * scores.array()).rowwise().sum();  // <x_i, s_i>
    // u_ij = k <s_i,s_j> + c * [<s_j, x_i - x_j> - <s_i, x_i - x_j>] + tr
    //      = k <s_i,s_j> + c * (xs_ij - q_j + xs_ji - q_i) + tr
    Matrix u = kv.cwiseProduct(ss) + tr;
    u.array() += dc.array() * (xs.array() + xs.transpose().array() -
                               (q.replicate(1, n) + q.transpose().replicate(n, 1)).array());
    const Scalar total = u.sum() - u.diagonal().sum();
    return total / (static_cast<Scalar>(n) * static_cast<Scalar>(n - 1));
  }

  // Code space (experimental): exact gradients through the encoder, trace by
  // central finite differences; O(n^2 d) kernel passes.
  const Scalar h = 1e-4;
  Scalar total = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const Vector xi = x.row(i).transpose();
      const Vector xj = x.row(j).transpose();
      const Vector si = scores.row(i).transpose();
      const Vector sj = scores.row(j).transpose();
      Scalar u = si.dot(sj) * k.eval(xi, xj);
      u += si.dot(k.grad_x(xj, xi));  // grad wrt second argument, by symmetry
      u += sj.dot(k.grad_x(xi, xj));
      Scalar trace = 0.0;
      for (Index c = 0; c < x.cols(); ++c) {
        Vector xp = xj, xm = xj;
        xp[c] += h;
        xm[c] -= h;
        trace += (k.grad_x(xi, xp)[c] - k.grad_x(xi, xm)[c]) / (2.0 * h);
      }
      // grad_x k(x, y) differentiated in y: d/dy_c [dk/dx_c](x, y)
      u += trace;
      total += u;
    }
  }
  return total / (static_cast<Scalar>(n) * static_cast<Scalar>(n - 1));
}

PrResult improved_pr(const Eigen::Ref<const Matrix>& real, const Eigen::Ref<const Matrix>& gen,
                     int k_neighbors) {
  validate_particles(real, "improved_pr");
  validate_particles(gen, "improved_pr");
  require(real.cols() == gen.cols(), "improved_pr: dimension mismatch");
  require(k_neighbors >= 1, "improved_pr: k must be >= 1");
  require(real.rows() > k_neighbors && gen.rows() > k_neighbors,
          "improved_pr: need at least k+1 points per set");

  // Radius of each point: distance to its k-th nearest neighbor within its
  // own set (self excluded).
  const auto radii = [k_neighbors](const Eigen::Ref<const Matrix>& a) {
    const Index n = a.rows();
    const Matrix d2 = pairwise_sq_dists(a, a);
    Vector r(n);
    std::vector<Scalar> row(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) row[static_cast<size_t>(j)] = d2(i, j);
      row[static_cast<size_t>(i)] = std::numeric_limits<Scalar>::infinity();
      std::nth_element(row.begin(), row.begin() + (k_neighbors - 1), row.end());
      r[i] = row[static_cast<size_t>(k_neighbors - 1)];
    }
    return r;  // squared radii
  };

  const auto covered_fraction = [](const Eigen::Ref<const Matrix>& points,
                                   const Eigen::Ref<const Matrix>& manifold,
                                   const Vector& sq_radii) {
    const Matrix d2 = pairwise_sq_dists(points, manifold);
    Index inside = 0;
    for (Index i = 0; i < points.rows(); ++i) {
      for (Index j = 0; j < manifold.rows(); ++j) {
        if (d2(i, j) <= sq_radii[j]) {  // boundary counts as inside
          ++inside;
          break;
        }
      }
    }
    return static_cast<Scalar>(inside) / static_cast<Scalar>(points.rows());
  };

  PrResult out;
  out.precision = covered_fraction(gen, real, radii(real));
  out.recall = covered_fraction(real, gen, radii(gen));
  return out;
}

OccupancyResult mode_occupancy(const Eigen::Ref<const Matrix>& x, const GaussianMixture& gm) {
  validate_particles(x, "mode_occupancy");
  require(x.cols() == gm.dim(), "mode_occupancy: dimension mismatch");
  const Index k = gm.size();
  Matrix means(k, gm.dim());
  Scalar max_std = 0.0;
  for (Index c = 0; c < k; ++c) {
    means.row(c) = gm.components()[static_cast<size_t>(c)].mean.transpose();
    max_std = std::max(max_std, std::sqrt(gm.components()[static_cast<size_t>(c)].variance));
  }
  bool separated = true;
  for (Index a = 0; a < k && separated; ++a)
    for (Index b = a + 1; b < k; ++b)
      if ((means.row(a) - means.row(b)).norm() <= 6.0 * max_std) {
        separated = false;
        break;
      }

  const Matrix d2 = pairwise_sq_dists(x, means);
  Vector counts = Vector::Zero(k);
  for (Index i = 0; i < x.rows(); ++i) {
    Index best;
    d2.row(i).minCoeff(&best);
    counts[best] += 1.0;
  }
  return {counts / static_cast<Scalar>(x.rows()), separated};
}

}  // namespace nck
