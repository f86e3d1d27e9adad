#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qelift/indexing.hpp"
#include "qelift/measurement.hpp"
#include "qelift/metrics.hpp"
#include "qelift/solvers.hpp"

namespace qelift {

enum class NoiseMode { absolute, nsr };

std::string method_name(Method m);
Method method_from_name(const std::string& name);
std::string noise_mode_name(NoiseMode mode);
NoiseMode noise_mode_from_name(const std::string& name);

// Full description of a synthetic sweep: one experiment instance per
// (noise level, trial), solved at every oversampling factor in `m` with
// every requested method. Loadable from a JSON file; unknown keys are
// rejected so typos fail loudly.
struct ExperimentConfig {
  int n = 100;
  int d = 1;
  std::vector<int> m;  // grid sizes; empty means {n}
  int masks = 3;
  std::vector<Method> methods = {Method::qe};
  NoiseMode noise_mode = NoiseMode::absolute;
  std::vector<double> noise_levels = {0.0};
  int trials = 5;
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  SolverConfig solver;  // per-run method is set from `methods`
  bool emit_timings = false;

  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);
  std::vector<int> grid_sizes() const;  // `m` with the empty default applied
  void validate() const;
};

// Unit-norm signal with independent complex standard-Gaussian entries.
ComplexTensor generate_ground_truth(int n, int d, std::uint64_t seed);

// Bernoulli(1/2) binary masks over the object grid; an all-zero draw is
// resampled so every mask keeps at least one active cell.
MaskSet generate_masks(int n, int d, int n_masks, std::uint64_t seed);

// Adds a complex Gaussian vector rescaled so its norm is exactly
// target_norm. target_norm = 0 returns b unchanged.
MeasurementVector add_noise(const MeasurementVector& b, double target_norm,
                            std::uint64_t seed);

// Metrics of a solved instance against its ground truth. phase_dist is NaN
// when the result carries no extracted signal.
TrialMetrics evaluate_trial(const ComplexTensor& x0, const ReconstructionResult& res,
                            double noise_norm, double clean_norm);

struct SweepOutput {
  std::string results_path;
  std::string summary_path;
  std::optional<std::string> timings_path;
  int rows = 0;
  int diverged = 0;
};

// Runs the full sweep and writes results.csv (one row per solve) and
// summary.csv (per-configuration means over successful trials) under
// cfg.output_dir. Ground truth and masks are shared across grid sizes and
// methods within a (level, trial) instance; solver divergence is recorded
// in its row and the sweep continues.
SweepOutput run_sweep(const ExperimentConfig& cfg);

// Settings for the grayscale image demo.
struct ImageConfig {
  int masks = 8;
  double nsr = 0.01;
  std::uint64_t seed = 1;
  SolverConfig solver;
};

struct ImageReport {
  int side = 0;
  double relative_error = 0.0;  // against the input raster, before quantization
  double residual = 0.0;
  int rank_tight = 0;
  int rank_loose = 0;
  int iterations_run = 0;
};

// Treats the image as a non-negative 2-D signal, simulates masked Fourier
// magnitude measurements, reconstructs, fixes the global phase, and writes
// the recovered raster plus a one-row metrics CSV. The side length is
// capped at 32 to keep the lifted problem tractable.
ImageReport reconstruct_image(const std::string& input_pgm, const std::string& output_pgm,
                              const std::string& metrics_csv, const ImageConfig& cfg);

}  // namespace qelift
