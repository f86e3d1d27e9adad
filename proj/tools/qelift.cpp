#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qelift/checks.hpp"
#include "qelift/harness.hpp"
#include "qelift/io.hpp"
#include "qelift/measurement.hpp"

namespace {

using namespace qelift;

// Reads a frequency list: one frequency vector per line, d real columns,
// comma or whitespace separated. Lines starting with '#' are skipped.
Eigen::MatrixXd read_frequency_list(const std::string& path, int d) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open frequency list '" + path + "'");
  std::vector<double> flat;
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream fields(line);
    double v = 0.0;
    int cols = 0;
    while (fields >> v) {
      flat.push_back(v);
      ++cols;
    }
    if (cols == 0) continue;
    if (cols != d)
      throw InputError("frequency list row " + std::to_string(rows + 1) + " has " +
                       std::to_string(cols) + " columns, expected " + std::to_string(d));
    ++rows;
  }
  if (rows == 0) throw InputError("frequency list '" + path + "' is empty");
  Eigen::MatrixXd zetas(rows, d);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < d; ++j) zetas(i, j) = flat[std::size_t(i) * d + j];
  return zetas;
}

void add_solver_options(CLI::App* cmd, SolverConfig& sc, std::string& method) {
  cmd->add_option("--method", method, "Solver: qe, nuclear, or reweighted");
  cmd->add_option("--K", sc.K, "Target rank");
  cmd->add_option("--gamma", sc.gamma, "Envelope stiffness (0 = default N^2)");
  cmd->add_option("--step", sc.step, "Gradient step (0 = default 1/(M^2+1))");
  cmd->add_option("--iterations", sc.iterations, "Iteration count");
  cmd->add_flag("--strict-gamma", sc.strict_gamma, "Use the norm bound M^2 for gamma");
  cmd->add_option("--lambda", sc.lambda, "Nuclear penalty (0 = noise preset)");
  cmd->add_option("--delta", sc.delta, "Reweighting offset (0 = noise preset)");
  cmd->add_option("--outer-rounds", sc.outer_rounds, "Reweighting rounds");
}

int run(int argc, char** argv) {
  CLI::App app{"Fixed-rank PSD recovery from masked Fourier magnitudes"};
  app.require_subcommand(1);
  int status = 0;

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run a synthetic experiment sweep");
  std::string config_path;
  std::string sweep_output;
  sweep->add_option("config", config_path, "JSON experiment config")->required();
  sweep->add_option("--output-dir", sweep_output, "Override the config's output directory");
  sweep->callback([&] {
    ExperimentConfig cfg = ExperimentConfig::from_json_file(config_path);
    if (!sweep_output.empty()) cfg.output_dir = sweep_output;
    const SweepOutput out = run_sweep(cfg);
    std::cout << "results: " << out.results_path << "\n"
              << "summary: " << out.summary_path << "\n";
    if (out.timings_path) std::cout << "timings: " << *out.timings_path << "\n";
    std::cout << "rows: " << out.rows << " diverged: " << out.diverged << "\n";
  });

  // image
  auto* image = app.add_subcommand("image", "Reconstruct a grayscale image from "
                                            "simulated magnitude measurements");
  std::string image_in;
  std::string image_out;
  std::string image_metrics;
  ImageConfig icfg;
  std::string image_method = "qe";
  image->add_option("input", image_in, "Input PGM (square, side <= 32)")->required();
  image->add_option("output", image_out, "Output PGM path")->required();
  image->add_option("--metrics", image_metrics, "Metrics CSV path (default: output + .metrics.csv)");
  image->add_option("--masks", icfg.masks, "Number of binary masks");
  image->add_option("--nsr", icfg.nsr, "Noise-to-signal ratio");
  image->add_option("--seed", icfg.seed, "Random seed");
  add_solver_options(image, icfg.solver, image_method);
  image->callback([&] {
    icfg.solver.method = method_from_name(image_method);
    if (image_metrics.empty()) image_metrics = image_out + ".metrics.csv";
    const ImageReport rep = reconstruct_image(image_in, image_out, image_metrics, icfg);
    std::cout << "side: " << rep.side << "\n"
              << "relative_error: " << rep.relative_error << "\n"
              << "residual: " << rep.residual << "\n"
              << "rank_1e6: " << rep.rank_tight << " rank_1e3: " << rep.rank_loose << "\n"
              << "image: " << image_out << "\n"
              << "metrics: " << image_metrics << "\n";
  });

  // rank-analysis
  auto* rank = app.add_subcommand("rank-analysis",
                                  "Numerical rank of the lifted Fourier operator");
  int rank_n = 0;
  int rank_d = 1;
  int rank_m = 0;
  std::string freq_path;
  double rank_tol = 1e-8;
  rank->add_option("--n", rank_n, "Object grid size per dimension")->required();
  rank->add_option("--d", rank_d, "Dimension");
  auto* m_opt = rank->add_option("--m", rank_m, "Regular frequency grid size (m >= n)");
  auto* f_opt = rank->add_option("--frequencies", freq_path,
                                 "Frequency list CSV (d real columns per row)");
  m_opt->excludes(f_opt);
  rank->add_option("--tol", rank_tol, "Relative singular value cutoff");
  rank->callback([&] {
    FrequencyGrid grid = freq_path.empty()
                             ? FrequencyGrid::regular(rank_m > 0 ? rank_m : rank_n, rank_d)
                             : FrequencyGrid::explicit_list(
                                   read_frequency_list(freq_path, rank_d));
    const int r = lifted_fourier_rank(rank_n, rank_d, grid, rank_tol);
    long long bound = 1;
    for (int a = 0; a < rank_d; ++a) bound *= 2 * rank_n - 1;
    std::cout << "n=" << rank_n << " d=" << rank_d << " mode="
              << (grid.regular_mode() ? "regular" : "explicit")
              << " count=" << grid.count() << " rank=" << r << " bound=" << bound;
    if (grid.regular_mode())
      std::cout << " predicted=" << std::min<long long>(grid.count(), bound);
    std::cout << "\n";
  });

  // prox-check
  auto* prox = app.add_subcommand("prox-check",
                                  "Closed-form prox vs numerical minimizer");
  int prox_cases = 1000;
  std::uint64_t prox_seed = 1;
  double prox_tol = 1e-6;
  prox->add_option("--cases", prox_cases, "Number of randomized cases");
  prox->add_option("--seed", prox_seed, "Random seed");
  prox->add_option("--tol", prox_tol, "Per-coordinate tolerance");
  prox->callback([&] {
    const ProxCheckReport rep = run_prox_check(prox_cases, prox_seed, prox_tol);
    std::cout << "cases: " << rep.cases << "\nfailures: " << rep.failures
              << "\nmax_error: " << rep.max_error << "\nworst: " << rep.worst_case << "\n";
    if (rep.failures > 0) status = 3;
  });

  // grad-check
  auto* grad = app.add_subcommand("grad-check",
                                  "Transform forward/gradient vs reference and "
                                  "finite differences");
  std::uint64_t grad_seed = 1;
  double grad_pair_tol = 1e-10;
  double grad_fd_tol = 1e-5;
  grad->add_option("--seed", grad_seed, "Random seed");
  grad->add_option("--pair-tol", grad_pair_tol, "Transform vs reference tolerance");
  grad->add_option("--fd-tol", grad_fd_tol, "Finite-difference tolerance");
  grad->callback([&] {
    const GradCheckReport rep = run_grad_check(grad_seed, grad_pair_tol, grad_fd_tol);
    std::cout << "cases: " << rep.cases << "\nfailures: " << rep.failures
              << "\nmax_forward_rel: " << rep.max_forward_rel
              << "\nmax_gradient_rel: " << rep.max_gradient_rel
              << "\nmax_directional_err: " << rep.max_directional_err << "\n";
    if (rep.failures > 0) status = 3;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const qelift::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const qelift::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
