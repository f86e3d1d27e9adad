#include "qelift/solvers.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "qelift/metrics.hpp"
#include "qelift/prox.hpp"

namespace qelift {

namespace {

using ProxFn = std::function<Eigen::MatrixXcd(const Eigen::MatrixXcd&)>;
using RegFn = std::function<double(const Eigen::MatrixXcd&)>;

void check_common(const SolverConfig& cfg) {
  if (cfg.iterations < 1) throw ParameterError("iteration count must be >= 1");
  if (cfg.K < 1) throw ParameterError("target rank K must be >= 1");
}

// Accelerated proximal-gradient loop shared by all three methods. Starts
// from `start` when given (warm restarts reset the momentum sequence).
ReconstructionResult fista_core(const MeasurementOperator& A, const MeasurementVector& b,
                                const SolverConfig& cfg, double t, const ProxFn& prox,
                                const RegFn& reg, const Eigen::MatrixXcd* start) {
  const Eigen::Index N = A.N();
  ReconstructionResult res;
  Eigen::MatrixXcd X_prev =
      start != nullptr ? *start : Eigen::MatrixXcd::Zero(N, N);
  Eigen::MatrixXcd X_curr = X_prev;

  const auto t0 = std::chrono::steady_clock::now();
  for (int k = 1; k <= cfg.iterations; ++k) {
    const double momentum = (fista_theta(k) - 1.0) / fista_theta(k + 1);
    const Eigen::MatrixXcd X_int = X_curr + momentum * (X_curr - X_prev);
    double obj = 0.0;
    const Eigen::MatrixXcd G =
        A.gradient_with_objective(X_int, b, cfg.log ? &obj : nullptr);
    const Eigen::MatrixXcd stepped = X_int - t * G;
    if (!stepped.allFinite())
      throw DivergenceError("solver iterate became non-finite at iteration " +
                                std::to_string(k),
                            k);
    Eigen::MatrixXcd X_next = prox(stepped);
    if (!X_next.allFinite())
      throw DivergenceError("solver iterate became non-finite at iteration " +
                                std::to_string(k),
                            k);
    X_prev = std::move(X_curr);
    X_curr = std::move(X_next);
    ++res.iterations_run;

    if (cfg.log) {
      res.log.objective.push_back(obj);
      res.log.seconds.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      if (cfg.log_regularizer && reg) res.log.regularizer.push_back(reg(X_curr));
    }

    if (cfg.early_exit && k % 50 == 0) {
      const Eigen::MatrixXcd p = prox(X_curr - t * A.gradient(X_curr, b));
      if ((p - X_curr).norm() < cfg.early_exit_tol) break;
    }
  }

  res.X = std::move(X_curr);
  return res;
}

void finalize(const MeasurementOperator& A, const MeasurementVector& b,
              ReconstructionResult& res) {
  double obj = 0.0;
  A.gradient_with_objective(res.X, b, &obj);
  res.final_objective = obj;
  res.final_rank = numerical_rank(res.X, 1e-6);
  try {
    res.x = extract_signal(res.X, A.n(), A.d());
  } catch (const DegenerateOutputError&) {
    res.x.reset();
  }
}

void append_log(ReconstructionResult& res, ReconstructionResult&& round_res) {
  res.X = std::move(round_res.X);
  res.iterations_run += round_res.iterations_run;
  res.log.objective.insert(res.log.objective.end(), round_res.log.objective.begin(),
                           round_res.log.objective.end());
  res.log.regularizer.insert(res.log.regularizer.end(),
                             round_res.log.regularizer.begin(),
                             round_res.log.regularizer.end());
  res.log.seconds.insert(res.log.seconds.end(), round_res.log.seconds.begin(),
                         round_res.log.seconds.end());
}

ReconstructionResult run_weighted_nuclear(const MeasurementOperator& A,
                                          const MeasurementVector& b,
                                          const SolverConfig& cfg, int rounds) {
  check_common(cfg);
  const double t = resolve_step(A, cfg);
  const double lambda = cfg.lambda > 0.0 ? cfg.lambda : preset_lambda(cfg.noise_norm);
  const double delta = cfg.delta > 0.0 ? cfg.delta : preset_delta(cfg.noise_norm);
  if (!(lambda > 0.0)) throw ParameterError("nuclear penalty must be positive");
  if (!(delta > 0.0)) throw ParameterError("reweighting offset must be positive");

  Eigen::VectorXd weights = Eigen::VectorXd::Ones(A.N());
  ReconstructionResult res;
  for (int round = 1; round <= rounds; ++round) {
    const Eigen::VectorXd thresholds = t * lambda * weights;
    const RegFn reg = [lambda, weights](const Eigen::MatrixXcd& X) {
      return lambda * weights.dot(hermitian_eigenvalues(X).cwiseAbs());
    };
    const ProxFn prox = [&thresholds](const Eigen::MatrixXcd& X) {
      return prox_nuclear_psd_weighted(X, thresholds);
    };
    ReconstructionResult round_res =
        fista_core(A, b, cfg, t, prox, reg, round == 1 ? nullptr : &res.X);
    if (round == 1)
      res = std::move(round_res);
    else
      append_log(res, std::move(round_res));
    if (round < rounds)
      weights = reweighting_weights(hermitian_eigenvalues(res.X), delta);
  }
  finalize(A, b, res);
  return res;
}

}  // namespace

Eigen::VectorXd reweighting_weights(const Eigen::VectorXd& sigma, double delta) {
  if (!(delta > 0.0)) throw ParameterError("reweighting offset must be positive");
  return (sigma.array().abs() + delta).inverse();
}

double resolve_step(const MeasurementOperator& A, const SolverConfig& cfg) {
  if (cfg.step > 0.0) return cfg.step;
  const double M = double(A.measurement_count());
  return 1.0 / (M * M + 1.0);
}

double resolve_gamma(const MeasurementOperator& A, const SolverConfig& cfg) {
  if (cfg.gamma > 0.0) return cfg.gamma;
  if (cfg.strict_gamma) {
    const double M = double(A.measurement_count());
    return M * M;
  }
  const double N = double(A.N());
  return N * N;
}

ReconstructionResult fista_qe(const MeasurementOperator& A, const MeasurementVector& b,
                              const SolverConfig& cfg) {
  check_common(cfg);
  const double t = resolve_step(A, cfg);
  const double gamma = resolve_gamma(A, cfg);
  if (!(t * gamma < 1.0))
    throw ParameterError("step * gamma must stay below 1 (got " +
                         std::to_string(t * gamma) + ")");
  const ProxParams p(cfg.K, gamma, 1.0 / t);
  const ProxFn prox = [&p](const Eigen::MatrixXcd& X) { return prox_qe_hermitian(X, p); };
  const RegFn reg = [&p](const Eigen::MatrixXcd& X) {
    return envelope_value(hermitian_eigenvalues(X).cwiseMax(0.0), p.K, p.gamma);
  };
  ReconstructionResult res = fista_core(A, b, cfg, t, prox, reg, nullptr);
  finalize(A, b, res);
  return res;
}

ReconstructionResult fista_nuclear(const MeasurementOperator& A, const MeasurementVector& b,
                                   const SolverConfig& cfg) {
  return run_weighted_nuclear(A, b, cfg, 1);
}

ReconstructionResult fista_reweighted(const MeasurementOperator& A,
                                      const MeasurementVector& b,
                                      const SolverConfig& cfg) {
  if (cfg.outer_rounds < 1) throw ParameterError("outer_rounds must be >= 1");
  return run_weighted_nuclear(A, b, cfg, cfg.outer_rounds);
}

ReconstructionResult solve(const MeasurementOperator& A, const MeasurementVector& b,
                           const SolverConfig& cfg) {
  switch (cfg.method) {
    case Method::qe:
      return fista_qe(A, b, cfg);
    case Method::nuclear:
      return fista_nuclear(A, b, cfg);
    case Method::reweighted:
      return fista_reweighted(A, b, cfg);
  }
  throw ParameterError("unknown solver method");
}

ComplexTensor extract_signal(const Eigen::MatrixXcd& X, int n, int d) {
  if (X.rows() != X.cols()) throw DimensionError("signal extraction needs a square matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (X + X.adjoint()));
  if (es.info() != Eigen::Success)
    throw NumericalError("eigendecomposition failed during signal extraction");
  const Eigen::Index last = X.rows() - 1;
  const double lambda1 = es.eigenvalues()(last);
  if (!(lambda1 > 0.0))
    throw DegenerateOutputError("no positive eigenvalue to extract a signal from");
  const Eigen::VectorXcd x = std::sqrt(lambda1) * es.eigenvectors().col(last);
  return tensorize(x, n, d);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXcd> top_eigenpairs(const Eigen::MatrixXcd& X,
                                                            int count) {
  if (X.rows() != X.cols()) throw DimensionError("eigenpairs need a square matrix");
  if (count < 1 || count > X.rows()) throw ParameterError("eigenpair count out of range");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (X + X.adjoint()));
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Eigen::Index N = X.rows();
  Eigen::VectorXd values(count);
  Eigen::MatrixXcd vectors(N, count);
  for (int i = 0; i < count; ++i) {
    values(i) = es.eigenvalues()(N - 1 - i);
    vectors.col(i) = es.eigenvectors().col(N - 1 - i);
  }
  return {values, vectors};
}

}  // namespace qelift
