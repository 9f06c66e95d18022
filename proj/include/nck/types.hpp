#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nck {

using Scalar = double;
using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A set of n particles in R^d, one particle per row. This is the empirical
/// distribution every sampler evolves and every metric consumes.
using ParticleSet = Matrix;

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

/// Rejects empty or non-finite particle sets eagerly.
inline void validate_particles(const Eigen::Ref<const Matrix>& x, const char* where) {
  if (x.rows() < 1) throw std::invalid_argument(std::string(where) + ": empty particle set");
  if (!x.allFinite()) throw std::invalid_argument(std::string(where) + ": non-finite particle entries");
}

}  // namespace nck
