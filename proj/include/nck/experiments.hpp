#pragma once

#include <functional>

#include "nck/config.hpp"
#include "nck/io.hpp"
#include "nck/metrics.hpp"
#include "nck/sampler.hpp"
#include "nck/train.hpp"

namespace nck {

/// Everything a finished run leaves on disk, plus the echo that replays it.
struct RunRecord {
  std::string name;
  std::string out_dir;
  std::vector<std::string> artifacts;
  double wall_seconds = 0.0;
};

/// Creates out_dir (parents included). An existing non-empty directory is an
/// error unless overwrite is set.
void prepare_output_dir(const std::string& out_dir, bool overwrite);

/// Mixture described by repeated `component = weight | mean... | variance`
/// entries in [target].
GaussianMixture mixture_from_config(const Config& cfg);

/// The same target generalized to dimension d: constant-mean components are
/// replicated coordinate-wise (optionally scaled by 1/sqrt(d/2) when
/// [target] scale_means_by_dim is set).
GaussianMixture mixture_for_dim(const Config& cfg, Index d);

NoiseSchedule schedule_from_config(const Config& cfg);
KernelSpec kernel_spec_from_config(const Config& cfg);
InitSpec init_spec_from_config(const Config& cfg);

/// Score source: [score] source = analytic (default) or a checkpoint path.
ScoreSource score_source_from_config(const Config& cfg, const GaussianMixture& target);

/// Runs one named method (svgd, sgld, a-svgd, a-sgld, nck-svgd) from its
/// config section against the target, starting at init.
ParticleSet run_sampler_method(const std::string& method, const Config& cfg,
                               const GaussianMixture& target, const ParticleSet& init,
                               std::uint64_t seed,
                               const ScoreSource* score_override = nullptr);

// The desk-scale studies. Each writes CSV artifacts, particle snapshots
// where noted, a config echo, and a run record under out_dir.
RunRecord run_weight_recovery(const Config& cfg, const std::string& out_dir);
RunRecord run_dimension_sweep(const Config& cfg, const std::string& out_dir, int threads = 0);
RunRecord run_median_diagnostic(const Config& cfg, const std::string& out_dir);
RunRecord run_beta_sweep(const Config& cfg, const std::string& out_dir);

/// Single sampling run: particles.bin + metrics.csv for one method/seed.
RunRecord run_sample(const Config& cfg, const std::string& method, std::uint64_t seed,
                     const std::string& out_dir);

/// Score-network training driven by [train]; writes score.ckpt + loss.csv.
RunRecord run_train_score(const Config& cfg, const std::string& out_dir);

/// Autoencoder training driven by [train]; writes encoder.ckpt,
/// decoder.ckpt + loss.csv.
RunRecord run_train_kernel(const Config& cfg, const std::string& out_dir);

/// Density grid of p^(1/beta) over a square box; returns the written path.
std::string write_density_grid(const GaussianMixture& target, Scalar beta, Scalar lo,
                               Scalar hi, Index resolution, const std::string& path);

/// Runs fn(0..count-1) on a small worker pool; results must go to
/// preallocated slots so the outcome is independent of scheduling.
void parallel_cells(Index count, int threads, const std::function<void(Index)>& fn);

void write_run_record(RunRecord& record, const Config& cfg);

}  // namespace nck
