#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "nck/conditioned_net.hpp"
#include "nck/types.hpp"

namespace nck {

// Particle files: one ASCII header line "n d level sigma", then n*d
// little-endian 8-byte floats in row-major order. level is -1 and sigma 0
// for snapshots taken outside an annealing level.
struct ParticleFile {
  Matrix particles;
  Index level = -1;
  Scalar sigma = 0.0;
};

void write_particles(const std::string& path, const Eigen::Ref<const Matrix>& x,
                     Index level = -1, Scalar sigma = 0.0);
ParticleFile read_particles(const std::string& path);

// Network checkpoints: ASCII header (conditioning, normalization, layer
// dims and activation tags), then the flat parameter block as 8-byte
// floats. Round trips are bit-exact.
void save_checkpoint(const std::string& path, const ConditionedNet& net);
ConditionedNet load_checkpoint(const std::string& path);

/// CSV with a fixed, documented column set; numeric cells use shortest
/// round-trip formatting so identical runs produce identical bytes.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);

  static std::string num(Scalar v);
  static std::string num(Index v);

 private:
  std::ofstream out_;
  size_t columns_;
};

std::string format_scalar(Scalar v);  // shortest round-trip decimal

}  // namespace nck
