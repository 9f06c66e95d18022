#include "nck/cli.hpp"

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "nck/experiments.hpp"

namespace nck {

namespace {

std::string default_out(const std::string& leaf) {
  const char* root = std::getenv("NCK_OUTPUT_ROOT");
  return std::string(root != nullptr ? root : "runs") + "/" + leaf;
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  bool overwrite = false;
  long long seed = -1;  // >= 0 replaces [experiment] seeds
};

void add_common(CLI::App* cmd, CommonArgs& args, const std::string& leaf) {
  cmd->add_option("--config", args.config_path, "experiment config file")->required();
  cmd->add_option("--out", args.out_dir, "output directory")->default_val(default_out(leaf));
  cmd->add_flag("--overwrite", args.overwrite, "reuse a non-empty output directory");
  cmd->add_option("--seed", args.seed, "replace the config seed list with one seed");
}

Config load_config(const CommonArgs& args) {
  Config cfg = Config::parse_file(args.config_path);
  if (args.seed >= 0)
    cfg.set("experiment", "seeds", std::to_string(args.seed));
  return cfg;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"noise-conditional kernel SVGD sampling and evaluation"};
  app.require_subcommand(1);

  CommonArgs sweep_args, median_args, weight_args, beta_args, train_score_args,
      train_kernel_args;
  int sweep_threads = 0;

  auto* sweep = app.add_subcommand("sweep-dim", "MMD across data dimensions per method");
  add_common(sweep, sweep_args, "sweep-dim");
  sweep->add_option("--threads", sweep_threads, "worker threads (0 = hardware)");

  auto* median = app.add_subcommand("median-diag",
                                    "median pairwise distance per noise level and dimension");
  add_common(median, median_args, "median-diag");

  auto* weight = app.add_subcommand("weight-recovery",
                                    "mode occupancy of SVGD variants on an imbalanced target");
  add_common(weight, weight_args, "weight-recovery");

  auto* beta = app.add_subcommand("beta-sweep",
                                  "entropy-regularizer sweep: occupancy, precision/recall, density grids");
  add_common(beta, beta_args, "beta-sweep");

  auto* train_score_cmd =
      app.add_subcommand("train-score", "train a noise-conditional score network");
  add_common(train_score_cmd, train_score_args, "train-score");

  auto* train_kernel_cmd =
      app.add_subcommand("train-kernel", "train the noise-conditional autoencoder pair");
  add_common(train_kernel_cmd, train_kernel_args, "train-kernel");

  CommonArgs sample_args;
  std::string sample_method = "nck-svgd";
  long long sample_seed = 0;
  auto* sample_cmd = app.add_subcommand("sample", "one sampling run: particles + metrics");
  sample_cmd->add_option("--config", sample_args.config_path, "experiment config file")
      ->required();
  sample_cmd->add_option("--method", sample_method,
                         "svgd | sgld | a-svgd | a-sgld | nck-svgd");
  sample_cmd->add_option("--seed", sample_seed, "run seed")->default_val(0);
  sample_cmd->add_option("--out", sample_args.out_dir, "output directory")
      ->default_val(default_out("sample"));
  sample_cmd->add_flag("--overwrite", sample_args.overwrite,
                       "reuse a non-empty output directory");

  std::string eval_real, eval_gen, eval_metric = "mmd", eval_config;
  int eval_k = 3;
  double eval_sigma = 1.0;
  auto* eval_cmd = app.add_subcommand("eval", "one metric row on persisted particle files");
  eval_cmd->add_option("--real", eval_real, "reference particle file")->required();
  eval_cmd->add_option("--gen", eval_gen, "generated particle file")->required();
  eval_cmd->add_option("--metric", eval_metric, "mmd | ksd | ipr");
  eval_cmd->add_option("--k", eval_k, "neighbor count for ipr")->default_val(3);
  eval_cmd->add_option("--target-config", eval_config, "config with [target] (ksd only)");
  eval_cmd->add_option("--sigma", eval_sigma, "noise level for ksd")->default_val(1.0);

  std::string plot_config, plot_out = "grid.csv";
  double plot_beta = 1.0, plot_lo = -8.0, plot_hi = 8.0;
  long long plot_res = 50;
  auto* plot_cmd = app.add_subcommand("plot-data", "density grid of p^(1/beta) as CSV");
  plot_cmd->add_option("--config", plot_config, "config with [target]")->required();
  plot_cmd->add_option("--beta", plot_beta, "tempering exponent")->default_val(1.0);
  plot_cmd->add_option("--lo", plot_lo, "box lower bound")->default_val(-8.0);
  plot_cmd->add_option("--hi", plot_hi, "box upper bound")->default_val(8.0);
  plot_cmd->add_option("--resolution", plot_res, "grid points per axis")->default_val(50);
  plot_cmd->add_option("--out", plot_out, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sweep->parsed()) {
      Config cfg = load_config(sweep_args);
      prepare_output_dir(sweep_args.out_dir, sweep_args.overwrite);
      run_dimension_sweep(cfg, sweep_args.out_dir, sweep_threads);
    } else if (median->parsed()) {
      Config cfg = load_config(median_args);
      prepare_output_dir(median_args.out_dir, median_args.overwrite);
      run_median_diagnostic(cfg, median_args.out_dir);
    } else if (weight->parsed()) {
      Config cfg = load_config(weight_args);
      prepare_output_dir(weight_args.out_dir, weight_args.overwrite);
      run_weight_recovery(cfg, weight_args.out_dir);
    } else if (beta->parsed()) {
      Config cfg = load_config(beta_args);
      prepare_output_dir(beta_args.out_dir, beta_args.overwrite);
      run_beta_sweep(cfg, beta_args.out_dir);
    } else if (train_score_cmd->parsed()) {
      Config cfg = load_config(train_score_args);
      prepare_output_dir(train_score_args.out_dir, train_score_args.overwrite);
      run_train_score(cfg, train_score_args.out_dir);
    } else if (train_kernel_cmd->parsed()) {
      Config cfg = load_config(train_kernel_args);
      prepare_output_dir(train_kernel_args.out_dir, train_kernel_args.overwrite);
      run_train_kernel(cfg, train_kernel_args.out_dir);
    } else if (sample_cmd->parsed()) {
      Config cfg = Config::parse_file(sample_args.config_path);
      prepare_output_dir(sample_args.out_dir, sample_args.overwrite);
      run_sample(cfg, sample_method, static_cast<std::uint64_t>(sample_seed),
                 sample_args.out_dir);
    } else if (eval_cmd->parsed()) {
      const Matrix real = read_particles(eval_real).particles;
      const Matrix gen = read_particles(eval_gen).particles;
      if (eval_metric == "mmd") {
        std::cout << "metric,value,detail\n"
                  << "mmd2," << format_scalar(mmd_squared(real, gen)) << ",median-bandwidth\n";
      } else if (eval_metric == "ipr") {
        const PrResult pr = improved_pr(real, gen, eval_k);
        std::cout << "metric,value,detail\n"
                  << "precision," << format_scalar(pr.precision) << ",k=" << eval_k << '\n'
                  << "recall," << format_scalar(pr.recall) << ",k=" << eval_k << '\n';
      } else if (eval_metric == "ksd") {
        if (eval_config.empty())
          throw std::invalid_argument("eval --metric ksd needs --target-config");
        Config cfg = Config::parse_file(eval_config);
        const GaussianMixture target = mixture_from_config(cfg);
        const ScoreSource source = ScoreSource::analytic(target, true);
        KernelSpec spec = kernel_spec_from_config(cfg);
        const ConditionedKernel kernel = condition(spec, eval_sigma, gen);
        std::cout << "metric,value,detail\n"
                  << "ksd2," << format_scalar(ksd_squared(gen, source, eval_sigma, kernel))
                  << ",sigma=" << format_scalar(eval_sigma) << '\n';
      } else {
        throw std::invalid_argument("unknown metric: " + eval_metric);
      }
    } else if (plot_cmd->parsed()) {
      Config cfg = Config::parse_file(plot_config);
      write_density_grid(mixture_from_config(cfg), plot_beta, plot_lo, plot_hi,
                         static_cast<Index>(plot_res), plot_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace nck
