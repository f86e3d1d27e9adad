#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "qelift/indexing.hpp"
#include "qelift/measurement.hpp"

namespace qelift {

enum class Method { qe, nuclear, reweighted };

// Solver parameterization. Non-positive gamma/step/lambda/delta mean "use
// the default": gamma = N^2 (or M^2 in strict mode), step = 1/(M^2 + 1),
// and the noise-calibrated presets for the baseline penalties.
struct SolverConfig {
  Method method = Method::qe;
  int K = 1;
  double gamma = 0.0;
  double step = 0.0;
  int iterations = 10000;
  bool strict_gamma = false;   // envelope stiffness from the norm bound M^2
  double lambda = 0.0;         // nuclear penalty (baselines)
  double delta = 0.0;          // reweighting offset
  double noise_norm = 0.0;     // feeds the lambda/delta presets
  int outer_rounds = 2;        // reweighted only
  bool early_exit = false;     // optional stop on stationarity residual
  double early_exit_tol = 1e-10;
  bool log = false;            // record per-iteration objective and time
  bool log_regularizer = false;
};

// Baseline penalty presets calibrated to the noise magnitude.
inline double preset_lambda(double noise_norm) { return 0.01 + 0.75 * noise_norm; }
inline double preset_delta(double noise_norm) { return 0.01 + 0.05 * noise_norm; }

// Reweighting rule w_i = 1 / (|sigma_i| + delta) for a spectrum sigma in
// non-increasing order; larger eigenvalues receive smaller penalties.
Eigen::VectorXd reweighting_weights(const Eigen::VectorXd& sigma, double delta);

// Momentum sequence theta_k = (k+1)/2, k >= 1.
inline double fista_theta(int k) { return 0.5 * (k + 1); }

struct IterationLog {
  std::vector<double> objective;    // (1/2)||A(X) - b||^2 at the gradient point
  std::vector<double> regularizer;  // optional, empty unless requested
  std::vector<double> seconds;      // wall clock since solve start
};

struct ReconstructionResult {
  Eigen::MatrixXcd X;
  std::optional<ComplexTensor> x;  // extracted signal; absent if degenerate
  IterationLog log;
  int final_rank = 0;              // numerical rank of X at 1e-6
  int iterations_run = 0;
  double final_objective = 0.0;    // (1/2)||A(X) - b||^2 at the returned X
};

ReconstructionResult fista_qe(const MeasurementOperator& A, const MeasurementVector& b,
                              const SolverConfig& cfg);
ReconstructionResult fista_nuclear(const MeasurementOperator& A, const MeasurementVector& b,
                                   const SolverConfig& cfg);
ReconstructionResult fista_reweighted(const MeasurementOperator& A, const MeasurementVector& b,
                                      const SolverConfig& cfg);
// Dispatch on cfg.method.
ReconstructionResult solve(const MeasurementOperator& A, const MeasurementVector& b,
                           const SolverConfig& cfg);

// sqrt(lambda_1) times the leading eigenvector, shaped back onto the object
// grid. Throws DegenerateOutputError when the top eigenvalue is not positive.
ComplexTensor extract_signal(const Eigen::MatrixXcd& X, int n, int d);

// Leading eigenpairs in non-increasing eigenvalue order (for inspecting
// K > 1 solutions).
std::pair<Eigen::VectorXd, Eigen::MatrixXcd> top_eigenpairs(const Eigen::MatrixXcd& X,
                                                            int count);

// Effective step and envelope stiffness for an operator under a config.
double resolve_step(const MeasurementOperator& A, const SolverConfig& cfg);
double resolve_gamma(const MeasurementOperator& A, const SolverConfig& cfg);

}  // namespace qelift
