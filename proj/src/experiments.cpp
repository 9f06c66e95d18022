#include "nck/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace nck {

namespace fs = std::filesystem;

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return mix64(seed ^ mix64(stream ^ mix64(counter)));
}

std::vector<std::uint64_t> seeds_from_config(const Config& cfg) {
  const auto values = cfg.get_scalars("experiment", "seeds", {0.0});
  std::vector<std::uint64_t> seeds;
  for (const Scalar v : values) seeds.push_back(static_cast<std::uint64_t>(v));
  return seeds;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace

void prepare_output_dir(const std::string& out_dir, bool overwrite) {
  const fs::path dir(out_dir);
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir))
      throw std::runtime_error("output path exists and is not a directory: " + out_dir);
    if (!fs::is_empty(dir) && !overwrite)
      throw std::runtime_error("output directory not empty (pass --overwrite to reuse): " +
                               out_dir);
  }
  fs::create_directories(dir);
}

GaussianMixture mixture_from_config(const Config& cfg) {
  const auto raw = cfg.get_all("target", "component");
  require(!raw.empty(), "config [target]: at least one 'component = w | mean... | v' required");
  std::vector<MixtureComponent> comps;
  for (const auto& entry : raw) {
    std::vector<std::string> parts;
    std::string token;
    std::istringstream in(entry);
    while (std::getline(in, token, '|')) parts.push_back(token);
    require(parts.size() == 3,
            "config [target] component: expected 'weight | mean... | variance'");
    MixtureComponent c;
    c.weight = std::stod(parts[0]);
    std::istringstream means(parts[1]);
    std::vector<Scalar> mean_values;
    Scalar v = 0;
    while (means >> v) mean_values.push_back(v);
    require(!mean_values.empty(), "config [target] component: empty mean vector");
    c.mean = Eigen::Map<Vector>(mean_values.data(), static_cast<Index>(mean_values.size()));
    c.variance = std::stod(parts[2]);
    comps.push_back(std::move(c));
  }
  return GaussianMixture(std::move(comps));
}

GaussianMixture mixture_for_dim(const Config& cfg, Index d) {
  GaussianMixture base = mixture_from_config(cfg);
  if (base.dim() == d) return base;
  const bool scale = cfg.get_bool("target", "scale_means_by_dim", false);
  const Scalar factor =
      scale ? 1.0 / std::sqrt(static_cast<Scalar>(d) / 2.0) : 1.0;
  std::vector<MixtureComponent> comps;
  for (const auto& c : base.components()) {
    const Scalar first = c.mean[0];
    require((c.mean.array() == first).all(),
            "mixture_for_dim: only constant-mean components generalize across d");
    comps.push_back({c.weight, Vector::Constant(d, first * factor), c.variance});
  }
  return GaussianMixture(std::move(comps));
}

NoiseSchedule schedule_from_config(const Config& cfg) {
  if (cfg.has("schedule", "sigmas")) {
    return NoiseSchedule(cfg.get_scalars("schedule", "sigmas"));
  }
  const Scalar first = cfg.get_scalar("schedule", "sigma_first", 20.0);
  const Scalar last = cfg.get_scalar("schedule", "sigma_last", 1.0);
  const Index levels = cfg.get_index("schedule", "levels", 10);
  return NoiseSchedule::geometric(first, last, levels);
}

KernelSpec kernel_spec_from_config(const Config& cfg) {
  KernelSpec spec;
  spec.family = kernel_family_from_string(cfg.get_string("kernel", "family", "mixed"));
  spec.gamma0 = cfg.get_scalar("kernel", "gamma0", 1.0);
  spec.tau0 = cfg.get_scalar("kernel", "tau0", -0.5);
  const std::string space = cfg.get_string("kernel", "space", "data");
  if (space == "data") {
    spec.space = KernelSpace::kData;
  } else if (space == "code") {
    spec.space = KernelSpace::kCode;
    spec.encoder = std::make_shared<const ConditionedNet>(
        load_checkpoint(cfg.get_string("kernel", "encoder")));
  } else {
    throw std::invalid_argument("config [kernel] space: expected data or code");
  }
  const std::string rule = cfg.get_string("kernel", "bandwidth_rule", "median");
  if (rule == "median") spec.bandwidth_rule = BandwidthRule::kMedianDistance;
  else if (rule == "median_sq") spec.bandwidth_rule = BandwidthRule::kMedianSqDistance;
  else throw std::invalid_argument("config [kernel] bandwidth_rule: expected median or median_sq");
  spec.code_space_median = cfg.get_bool("kernel", "code_space_median", false);
  spec.imq_rescale = cfg.get_bool("kernel", "imq_rescale", false);
  spec.validate();
  return spec;
}

InitSpec init_spec_from_config(const Config& cfg) {
  InitSpec spec;
  const std::string mode = cfg.get_string("init", "mode", "uniform_box");
  if (mode == "uniform_box") spec.mode = InitMode::kUniformBox;
  else if (mode == "gaussian") spec.mode = InitMode::kGaussian;
  else if (mode == "from_file") spec.mode = InitMode::kFromFile;
  else throw std::invalid_argument("config [init] mode: unknown mode " + mode);
  spec.lo = cfg.get_scalar("init", "lo", -8.0);
  spec.hi = cfg.get_scalar("init", "hi", 8.0);
  spec.scale = cfg.get_scalar("init", "scale", 1.0);
  spec.path = cfg.get_string("init", "path", "");
  return spec;
}

ScoreSource score_source_from_config(const Config& cfg, const GaussianMixture& target) {
  const std::string source = cfg.get_string("score", "source", "analytic");
  if (source == "analytic") return ScoreSource::analytic(target, true);
  return ScoreSource::learned(
      std::make_shared<const ConditionedNet>(load_checkpoint(source)));
}

namespace {

struct MethodPlan {
  LoopKind kind = LoopKind::kSvgd;
  bool annealed = true;
  bool noise_conditional = true;  // only meaningful for SVGD loops
};

MethodPlan plan_for(const std::string& method) {
  if (method == "svgd") return {LoopKind::kSvgd, false, false};
  if (method == "sgld") return {LoopKind::kSgld, false, false};
  if (method == "a-svgd") return {LoopKind::kSvgd, true, false};
  if (method == "a-sgld") return {LoopKind::kSgld, true, false};
  if (method == "nck-svgd") return {LoopKind::kSvgd, true, true};
  throw std::invalid_argument("unknown sampler method: " + method);
}

}  // namespace

ParticleSet run_sampler_method(const std::string& method, const Config& cfg,
                               const GaussianMixture& target, const ParticleSet& init,
                               std::uint64_t seed, const ScoreSource* score_override) {
  const MethodPlan plan = plan_for(method);
  const bool svgd = plan.kind == LoopKind::kSvgd;

  SamplerConfig sampler;
  sampler.epsilon = cfg.get_scalar(method, "epsilon", svgd ? 0.5 : 0.1);
  sampler.iters = static_cast<int>(cfg.get_index(method, "iters", plan.annealed ? 100 : 1000));
  sampler.beta = cfg.get_scalar(method, "beta", 1.0);
  sampler.alpha = cfg.get_scalar(method, "alpha", 1.0);
  sampler.n = init.rows();
  sampler.seed = seed;

  NoiseSchedule schedule = plan.annealed
                               ? schedule_from_config(cfg)
                               : NoiseSchedule({cfg.get_scalar("schedule", "sigma_last", 1.0)});

  ScoreSource score = score_override != nullptr
                          ? *score_override
                          : (plan.annealed ? ScoreSource::analytic(target, true)
                                           : ScoreSource::analytic(target, false));

  AnnealOptions opts;
  opts.reference_n = cfg.get_index("kernel", "reference_n", 1024);
  opts.switch_level = static_cast<int>(cfg.get_index(method, "switch_level", 0));
  opts.noise_conditional_kernel = plan.noise_conditional;
  const std::string ref = cfg.get_string("kernel", "median_reference", "auto");
  if (ref == "auto") opts.median_reference = MedianReference::kAuto;
  else if (ref == "analytic") opts.median_reference = MedianReference::kAnalytic;
  else if (ref == "particles") opts.median_reference = MedianReference::kParticles;
  else throw std::invalid_argument("config [kernel] median_reference: unknown policy " + ref);

  std::optional<KernelSpec> kernel;
  if (svgd) {
    kernel = kernel_spec_from_config(cfg);
    if (!plan.noise_conditional) {
      // Bandwidth frozen to the unperturbed data scale.
      opts.fixed_reference = target.sample(opts.reference_n,
                                           derive_seed(seed, 0xf1dced, 0));
    }
  }
  return anneal(plan.kind, schedule, sampler, kernel, score, init, opts).particles;
}

void parallel_cells(Index count, int threads, const std::function<void(Index)>& fn) {
  if (threads <= 0)
    threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<Index>(threads, count));
  if (threads <= 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<Index> next(0);
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const Index i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

void write_run_record(RunRecord& record, const Config& cfg) {
  const std::string echo_path = record.out_dir + "/config_echo.cfg";
  std::ofstream echo(echo_path);
  if (!echo) throw std::runtime_error("cannot write config echo: " + echo_path);
  echo << cfg.serialize();
  echo.close();
  record.artifacts.push_back(echo_path);

  nlohmann::json j;
  j["name"] = record.name;
  j["out_dir"] = record.out_dir;
  j["artifacts"] = record.artifacts;
  j["wall_seconds"] = record.wall_seconds;
  j["config_echo"] = "config_echo.cfg";
  const std::string record_path = record.out_dir + "/run_record.json";
  std::ofstream out(record_path);
  if (!out) throw std::runtime_error("cannot write run record: " + record_path);
  out << j.dump(2) << '\n';
}

RunRecord run_weight_recovery(const Config& cfg, const std::string& out_dir) {
  Stopwatch watch;
  RunRecord record{"weight-recovery", out_dir, {}, 0.0};
  const GaussianMixture target = mixture_from_config(cfg);
  const ScoreSource source = score_source_from_config(cfg, target);
  const auto methods =
      cfg.get_strings("experiment", "methods", {"svgd", "nck-svgd"});
  const auto seeds = seeds_from_config(cfg);
  const Index n = cfg.get_index("experiment", "n", 1024);
  const InitSpec init_spec = init_spec_from_config(cfg);

  const std::string csv_path = out_dir + "/occupancy.csv";
  CsvWriter csv(csv_path, {"method", "seed", "component", "occupancy"});
  record.artifacts.push_back(csv_path);

  for (const auto seed : seeds) {
    const ParticleSet init =
        init_particles(init_spec, n, target.dim(), derive_seed(seed, 0x1417, 0));
    for (const auto& method : methods) {
      const ParticleSet final_particles =
          run_sampler_method(method, cfg, target, init, seed, &source);
      const OccupancyResult occ = mode_occupancy(final_particles, target);
      for (Index c = 0; c < occ.fractions.size(); ++c)
        csv.row({method, std::to_string(seed), CsvWriter::num(c),
                 CsvWriter::num(occ.fractions[c])});
      const std::string snap =
          out_dir + "/particles_" + method + "_seed" + std::to_string(seed) + ".bin";
      write_particles(snap, final_particles);
      record.artifacts.push_back(snap);
    }
  }
  record.wall_seconds = watch.seconds();
  write_run_record(record, cfg);
  return record;
}

RunRecord run_dimension_sweep(const Config& cfg, const std::string& out_dir, int threads) {
  Stopwatch watch;
  RunRecord record{"sweep-dim", out_dir, {}, 0.0};
  const auto dim_values = cfg.get_scalars("experiment", "dims", {2, 4, 8, 16, 32, 64});
  const auto methods =
      cfg.get_strings("experiment", "methods", {"a-svgd", "nck-svgd"});
  const auto seeds = seeds_from_config(cfg);
  const Index n = cfg.get_index("experiment", "n", 1024);
  const Index real_n = cfg.get_index("experiment", "real_n", 1024);
  const InitSpec init_spec = init_spec_from_config(cfg);

  struct Cell {
    Index d;
    std::uint64_t seed;
    std::vector<Scalar> mmd2;  // per method
  };
  std::vector<Cell> cells;
  for (const Scalar dv : dim_values)
    for (const auto seed : seeds)
      cells.push_back({static_cast<Index>(dv), seed,
                       std::vector<Scalar>(methods.size(),
                                           std::numeric_limits<Scalar>::quiet_NaN())});

  parallel_cells(static_cast<Index>(cells.size()), threads, [&](Index idx) {
    Cell& cell = cells[static_cast<size_t>(idx)];
    const GaussianMixture target = mixture_for_dim(cfg, cell.d);
    const Matrix real =
        target.sample(real_n, derive_seed(cell.seed, 0x8ea1, static_cast<std::uint64_t>(cell.d)));
    const ParticleSet init = init_particles(
        init_spec, n, cell.d, derive_seed(cell.seed, 0x1417, static_cast<std::uint64_t>(cell.d)));
    for (size_t m = 0; m < methods.size(); ++m) {
      try {
        const ParticleSet out =
            run_sampler_method(methods[m], cfg, target, init, cell.seed);
        cell.mmd2[m] = mmd_squared(real, out);
      } catch (const std::exception&) {
        // Aborted cells stay NaN; the sweep continues.
      }
    }
  });

  const std::string csv_path = out_dir + "/mmd.csv";
  CsvWriter csv(csv_path, {"method", "d", "seed", "mmd2"});
  record.artifacts.push_back(csv_path);
  for (size_t m = 0; m < methods.size(); ++m)
    for (const auto& cell : cells)
      csv.row({methods[m], CsvWriter::num(cell.d), std::to_string(cell.seed),
               CsvWriter::num(cell.mmd2[m])});
  record.wall_seconds = watch.seconds();
  write_run_record(record, cfg);
  return record;
}

RunRecord run_median_diagnostic(const Config& cfg, const std::string& out_dir) {
  Stopwatch watch;
  RunRecord record{"median-diag", out_dir, {}, 0.0};
  const auto dim_values = cfg.get_scalars("experiment", "dims", {2, 4, 8, 16, 32, 64});
  const auto seeds = seeds_from_config(cfg);
  const Index sample_n = cfg.get_index("experiment", "n", 1024);
  const NoiseSchedule schedule = schedule_from_config(cfg);

  const std::string csv_path = out_dir + "/medians.csv";
  CsvWriter csv(csv_path, {"d", "level", "sigma", "seed", "median"});
  record.artifacts.push_back(csv_path);

  for (const Scalar dv : dim_values) {
    const Index d = static_cast<Index>(dv);
    const GaussianMixture target = mixture_for_dim(cfg, d);
    for (Index level = 0; level < schedule.levels(); ++level) {
      const Scalar sigma = schedule.sigma(level);
      for (const auto seed : seeds) {
        const Matrix sample = target.perturbed(sigma).sample(
            sample_n, derive_seed(seed, 0x3ed1a, static_cast<std::uint64_t>(level * 1000 + d)));
        csv.row({CsvWriter::num(d), CsvWriter::num(level), CsvWriter::num(sigma),
                 std::to_string(seed), CsvWriter::num(median_pairwise(sample))});
      }
    }
  }
  record.wall_seconds = watch.seconds();
  write_run_record(record, cfg);
  return record;
}

std::string write_density_grid(const GaussianMixture& target, Scalar beta, Scalar lo,
                               Scalar hi, Index resolution, const std::string& path) {
  require(target.dim() == 2, "write_density_grid: grids are for 2-d targets");
  require(resolution >= 2, "write_density_grid: resolution must be >= 2");
  require(lo < hi, "write_density_grid: invalid box");
  require(beta > 0.0, "write_density_grid: beta must be positive");
  CsvWriter csv(path, {"x", "y", "density"});
  const Scalar step = (hi - lo) / static_cast<Scalar>(resolution - 1);
  Vector point(2);
  for (Index i = 0; i < resolution; ++i) {
    for (Index j = 0; j < resolution; ++j) {
      point[0] = lo + step * static_cast<Scalar>(i);
      point[1] = lo + step * static_cast<Scalar>(j);
      const Scalar value = std::exp(target.log_density(point) / beta);
      csv.row({CsvWriter::num(point[0]), CsvWriter::num(point[1]), CsvWriter::num(value)});
    }
  }
  return path;
}

RunRecord run_beta_sweep(const Config& cfg, const std::string& out_dir) {
  Stopwatch watch;
  RunRecord record{"beta-sweep", out_dir, {}, 0.0};
  const GaussianMixture target = mixture_from_config(cfg);
  const ScoreSource source = score_source_from_config(cfg, target);
  const auto betas = cfg.get_scalars("experiment", "betas", {0.5, 1.0, 2.0, 4.0});
  const auto seeds = seeds_from_config(cfg);
  const Index n = cfg.get_index("experiment", "n", 1024);
  const Index real_n = cfg.get_index("experiment", "real_n", 1024);
  const int k_neighbors = static_cast<int>(cfg.get_index("experiment", "pr_k", 3));
  const InitSpec init_spec = init_spec_from_config(cfg);

  const std::string csv_path = out_dir + "/beta_metrics.csv";
  CsvWriter csv(csv_path, {"beta", "seed", "name", "value"});
  record.artifacts.push_back(csv_path);

  Config beta_cfg = cfg;  // per-beta override of the nck-svgd section
  for (const auto seed : seeds) {
    const Matrix real = target.sample(real_n, derive_seed(seed, 0x8ea1, 0));
    const ParticleSet init =
        init_particles(init_spec, n, target.dim(), derive_seed(seed, 0x1417, 0));
    for (const Scalar beta : betas) {
      beta_cfg.set("nck-svgd", "beta", format_scalar(beta));
      const ParticleSet out =
          run_sampler_method("nck-svgd", beta_cfg, target, init, seed, &source);
      const OccupancyResult occ = mode_occupancy(out, target);
      const PrResult pr = improved_pr(real, out, k_neighbors);
      csv.row({CsvWriter::num(beta), std::to_string(seed), "precision",
               CsvWriter::num(pr.precision)});
      csv.row({CsvWriter::num(beta), std::to_string(seed), "recall",
               CsvWriter::num(pr.recall)});
      for (Index c = 0; c < occ.fractions.size(); ++c)
        csv.row({CsvWriter::num(beta), std::to_string(seed),
                 "occupancy_" + std::to_string(c), CsvWriter::num(occ.fractions[c])});
      const std::string snap = out_dir + "/particles_beta" + format_scalar(beta) + "_seed" +
                               std::to_string(seed) + ".bin";
      write_particles(snap, out);
      record.artifacts.push_back(snap);
    }
  }

  if (target.dim() == 2) {
    const Scalar lo = cfg.get_scalar("grid", "lo", -8.0);
    const Scalar hi = cfg.get_scalar("grid", "hi", 8.0);
    const Index resolution = cfg.get_index("grid", "resolution", 50);
    for (const Scalar beta : betas) {
      const std::string grid_path = out_dir + "/grid_beta" + format_scalar(beta) + ".csv";
      record.artifacts.push_back(
          write_density_grid(target, beta, lo, hi, resolution, grid_path));
    }
  }
  record.wall_seconds = watch.seconds();
  write_run_record(record, cfg);
  return record;
}

RunRecord run_sample(const Config& cfg, const std::string& method, std::uint64_t seed,
                     const std::string& out_dir) {
  Stopwatch watch;
  RunRecord record{"sample", out_dir, {}, 0.0};
  const GaussianMixture target = mixture_from_config(cfg);
  const ScoreSource source = score_source_from_config(cfg, target);
  const Index n = cfg.get_index("experiment", "n", 1024);
  const Index real_n = cfg.get_index("experiment", "real_n", 1024);
  const InitSpec init_spec = init_spec_from_config(cfg);

  const ParticleSet init =
      init_particles(init_spec, n, target.dim(), derive_seed(seed, 0x1417, 0));
  const ParticleSet out = run_sampler_method(method, cfg, target, init, seed, &source);

  const std::string particle_path = out_dir + "/particles.bin";
  write_particles(particle_path, out);
  record.artifacts.push_back(particle_path);

  const std::string csv_path = out_dir + "/metrics.csv";
  CsvWriter csv(csv_path, {"method", "seed", "metric", "value"});
  record.artifacts.push_back(csv_path);
  const OccupancyResult occ = mode_occupancy(out, target);
  for (Index c = 0; c < occ.fractions.size(); ++c)
    csv.row({method, std::to_string(seed), "occupancy_" + std::to_string(c),
             CsvWriter::num(occ.fractions[c])});
  const Matrix real = target.sample(real_n, derive_seed(seed, 0x8ea1, 0));
  csv.row({method, std::to_string(seed), "mmd2", CsvWriter::num(mmd_squared(real, out))});

  record.wall_seconds = watch.seconds();
  write_run_record(record, cfg);
  return record;
}

namespace {

TrainConfig train_config_from(const Config& cfg) {
  TrainConfig tc;
  tc.batch_size = static_cast<int>(cfg.get_index("train", "batch_size", 128));
  tc.steps = static_cast<int>(cfg.get_index("train", "steps", 2000));
  tc.learning_rate = cfg.get_scalar("train", "learning_rate", 1e-3);
  tc.final_learning_rate = cfg.get_scalar("train", "final_learning_rate", 0.0);
  tc.optimizer = optimizer_from_string(cfg.get_string("train", "optimizer", "adam"));
  tc.seed = static_cast<std::uint64_t>(cfg.get_index("train", "seed", 0));
  tc.dsm_sigma = cfg.get_scalar("train", "dsm_sigma", 0.1);
  return tc;
}

std::vector<Index> layer_dims(const Config& cfg, const std::string& key, Index in,
                              Index out, const std::vector<Scalar>& fallback_hidden) {
  std::vector<Index> dims{in};
  for (const Scalar h : cfg.get_scalars("train", key, fallback_hidden))
    dims.push_back(static_cast<Index>(h));
  dims.push_back(out);
  return dims;
}

ConditionedNet fresh_conditioned_net(const std::vector<Index>& dims, OutputScale norm,
                                     std::uint64_t seed) {
  std::vector<Activation> acts(dims.size() - 1, Activation::kSoftplus);
  acts.back() = Activation::kIdentity;
  return ConditionedNet(FeedforwardNet::init(dims, acts, seed),
                        {ConditioningMethod::kConcatLogSigma, norm});
}

void write_loss_csv(const std::string& path, const std::vector<Scalar>& losses) {
  CsvWriter csv(path, {"step", "loss"});
  for (size_t i = 0; i < losses.size(); ++i)
    csv.row({CsvWriter::num(static_cast<Index>(i)), CsvWriter::num(losses[i])});
}

}  // namespace

RunRecord run_train_score(const Config& cfg, const std::string& out_dir) {
  Stopwatch watch;
  RunRecord record{"train-score", out_dir, {}, 0.0};
  const GaussianMixture target = mixture_from_config(cfg);
  const NoiseSchedule schedule = schedule_from_config(cfg);
  const TrainConfig tc = train_config_from(cfg);
  const Objective objective =
      objective_from_string(cfg.get_string("train", "objective", "ncsn"));
  const OutputScale norm =
      cfg.get_bool("train", "inv_sigma_output", false) ? OutputScale::kInvSigma
                                                       : OutputScale::kNone;
  const Index d = target.dim();
  ConditionedNet net = fresh_conditioned_net(
      layer_dims(cfg, "hidden", d + 1, d, {128, 128}), norm,
      derive_seed(tc.seed, 0xb17, 0));
  const TrainResult result =
      train_score(net, objective, mixture_batches(target), schedule, tc);

  const std::string ckpt = out_dir + "/score.ckpt";
  save_checkpoint(ckpt, net);
  record.artifacts.push_back(ckpt);
  const std::string loss_path = out_dir + "/loss.csv";
  write_loss_csv(loss_path, result.losses);
  record.artifacts.push_back(loss_path);
  record.wall_seconds = watch.seconds();
  write_run_record(record, cfg);
  return record;
}

RunRecord run_train_kernel(const Config& cfg, const std::string& out_dir) {
  Stopwatch watch;
  RunRecord record{"train-kernel", out_dir, {}, 0.0};
  const GaussianMixture target = mixture_from_config(cfg);
  const NoiseSchedule schedule = schedule_from_config(cfg);
  const TrainConfig tc = train_config_from(cfg);
  const Index d = target.dim();
  const Index bottleneck =
      cfg.get_index("train", "bottleneck", std::max<Index>(1, (d + 3) / 4));
  require(bottleneck < d || d == 1, "train-kernel: bottleneck must be below the data dimension");

  ConditionedNet enc = fresh_conditioned_net(
      layer_dims(cfg, "enc_hidden", d + 1, bottleneck, {64}), OutputScale::kNone,
      derive_seed(tc.seed, 0xe2c, 0));
  ConditionedNet dec = fresh_conditioned_net(
      layer_dims(cfg, "dec_hidden", bottleneck + 1, d, {64}), OutputScale::kNone,
      derive_seed(tc.seed, 0xd3c, 0));
  const TrainResult result =
      train_autoencoder(enc, dec, mixture_batches(target), schedule, tc);

  const std::string enc_path = out_dir + "/encoder.ckpt";
  save_checkpoint(enc_path, enc);
  record.artifacts.push_back(enc_path);
  const std::string dec_path = out_dir + "/decoder.ckpt";
  save_checkpoint(dec_path, dec);
  record.artifacts.push_back(dec_path);
  const std::string loss_path = out_dir + "/loss.csv";
  write_loss_csv(loss_path, result.losses);
  record.artifacts.push_back(loss_path);
  record.wall_seconds = watch.seconds();
  write_run_record(record, cfg);
  return record;
}

}  // namespace nck
