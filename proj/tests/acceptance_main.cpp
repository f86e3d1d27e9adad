// Acceptance gate for the toolkit: one criterion per line, [PASS]/[FAIL],
// exit code 0 when everything holds and 3 otherwise. Each criterion is
// self-contained and deterministic, so a failure line plus its detail is
// enough to reproduce the issue.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qelift/checks.hpp"
#include "qelift/harness.hpp"
#include "qelift/measurement.hpp"
#include "qelift/metrics.hpp"
#include "qelift/prox.hpp"
#include "qelift/rng.hpp"
#include "qelift/solvers.hpp"

using namespace qelift;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Eigen::VectorXcd random_complex_vector(Rng& rng, Eigen::Index len) {
  Eigen::VectorXcd v(len);
  for (Eigen::Index i = 0; i < len; ++i) v(i) = rng.complex_normal();
  return v;
}

Eigen::MatrixXcd random_hermitian(Rng& rng, Eigen::Index n) {
  Eigen::MatrixXcd A(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = rng.complex_normal();
  return 0.5 * (A + A.adjoint());
}

MaskSet random_masks(Rng& rng, Eigen::Index N, int count) {
  MaskSet ms;
  for (int w = 0; w < count; ++w) {
    Eigen::VectorXd mask(N);
    bool any = false;
    for (Eigen::Index i = 0; i < N; ++i) {
      mask(i) = rng.bernoulli() ? 1.0 : 0.0;
      any = any || mask(i) == 1.0;
    }
    if (!any) mask(0) = 1.0;
    ms.masks.push_back(mask);
  }
  return ms;
}

struct SolvedTrial {
  MeasurementOperator A;
  MeasurementVector b;
  Eigen::VectorXcd x0;
};

// Shared instance builder: regular grid of size m, ground truth and masks
// drawn from the instance seed, then noise of the given absolute norm.
SolvedTrial make_instance(int n, int m, int n_masks, double noise_norm,
                          std::uint64_t instance_seed) {
  const ComplexTensor x0 = generate_ground_truth(n, 1, Rng::mix(instance_seed, 1));
  const MaskSet masks = generate_masks(n, 1, n_masks, Rng::mix(instance_seed, 2));
  MeasurementOperator A(n, 1, FrequencyGrid::regular(m, 1), masks);
  const Eigen::VectorXcd v0 = vectorize(x0);
  MeasurementVector b = A.forward(v0 * v0.adjoint());
  if (noise_norm > 0.0) b = add_noise(b, noise_norm, Rng::mix(instance_seed, 3));
  return {std::move(A), std::move(b), v0};
}

Outcome criterion_prox_oracle() {
  const ProxCheckReport r = run_prox_check(1200, 20260816);
  return {r.failures == 0,
          fmt("cases=%d failures=%d max_err=%.2e", r.cases, r.failures, r.max_error)};
}

Outcome criterion_fft() {
  const GradCheckReport r = run_grad_check(7);
  return {r.failures == 0,
          fmt("cases=%d failures=%d fwd=%.2e grad=%.2e fd=%.2e", r.cases, r.failures,
              r.max_forward_rel, r.max_gradient_rel, r.max_directional_err)};
}

Outcome criterion_rank_law() {
  int checked = 0;
  for (int n = 2; n <= 4; ++n) {
    for (int d = 1; d <= 2; ++d) {
      long bound = 1, count_base = 2 * n - 1;
      for (int a = 0; a < d; ++a) bound *= count_base;
      for (int m = n; m <= 2 * n + 2; ++m) {
        long count = 1;
        for (int a = 0; a < d; ++a) count *= m;
        const int want = int(std::min(count, bound));
        const int got = lifted_fourier_rank(n, d, FrequencyGrid::regular(m, d));
        ++checked;
        if (got != want)
          return {false, fmt("regular n=%d d=%d m=%d: rank %d, expected %d", n, d, m,
                             got, want)};
      }
    }
  }
  Rng rng(991);
  for (int c = 0; c < 50; ++c) {
    const int n = 2 + c % 3;
    const int d = 1 + c % 2;
    long bound = 1;
    for (int a = 0; a < d; ++a) bound *= 2 * n - 1;
    const int count = 1 + int(rng.below(std::uint64_t(bound + 4)));
    Eigen::MatrixXd zetas(count, d);
    for (int i = 0; i < count; ++i)
      for (int j = 0; j < d; ++j)
        zetas(i, j) = (2.0 * rng.uniform() - 1.0) * std::numbers::pi;
    const int got = lifted_fourier_rank(n, d, FrequencyGrid::explicit_list(zetas));
    ++checked;
    if (got > bound)
      return {false, fmt("explicit n=%d d=%d |S|=%d: rank %d exceeds bound %ld", n, d,
                         count, got, bound)};
  }
  return {true, fmt("grids=%d all at min(|S|,(2n-1)^d); 50 explicit sets under bound",
                    checked)};
}

Outcome criterion_norm_bounds() {
  const int shapes[][2] = {{4, 1}, {8, 1}, {16, 1}, {3, 2}};
  double worst_rel = 0.0;
  for (const auto& s : shapes) {
    const int n = s[0], d = s[1];
    const MeasurementOperator A(n, d, FrequencyGrid::regular(n, d), MaskSet::none());
    const double want = double(A.N());
    const double rel = std::abs(A.operator_norm() - want) / want;
    worst_rel = std::max(worst_rel, rel);
    if (rel > 1e-8) return {false, fmt("plain n=%d d=%d: rel err %.2e", n, d, rel)};
  }
  Rng rng(41);
  for (int c = 0; c < 20; ++c) {
    const int n_masks = 1 + c % 3;
    const MeasurementOperator A(6, 1, FrequencyGrid::regular(6, 1),
                                random_masks(rng, 6, n_masks));
    const double lo = 6.0, hi = 6.0 * (n_masks + 1);
    const double nrm = A.operator_norm();
    if (nrm < lo * (1.0 - 1e-8) || nrm > hi * (1.0 + 1e-8))
      return {false, fmt("masked case %d: norm %.12f outside [%g, %g]", c, nrm, lo, hi)};
  }
  return {true, fmt("plain max rel err=%.2e; 20 masked norms inside [N, M]", worst_rel)};
}

Outcome criterion_noiseless_recovery() {
  std::vector<double> ds;
  int rank_one = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const SolvedTrial ins = make_instance(25, 25, 3, 0.0, Rng::mix(2605, trial));
    SolverConfig cfg;
    const ReconstructionResult res = fista_qe(ins.A, ins.b, cfg);
    if (!res.x.has_value()) return {false, fmt("trial %d: degenerate output", trial)};
    ds.push_back(phase_distance(ins.x0, vectorize(*res.x)));
    if (res.final_rank == 1) ++rank_one;
  }
  std::vector<double> sorted = ds;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[2];
  const bool pass = median <= 1e-4 && rank_one == 5;
  return {pass, fmt("median D=%.2e (max %.2e), rank-1 trials=%d/5", median,
                    sorted.back(), rank_one)};
}

Outcome criterion_rank_one_under_noise() {
  const double levels[] = {0.0, 1.0, 2.0, 3.0};
  double qe_worst_l2 = 0.0;
  for (int li = 0; li < 4; ++li) {
    for (int trial = 0; trial < 5; ++trial) {
      const SolvedTrial ins =
          make_instance(32, 32, 3, levels[li], Rng::mix(6100 + li, 100 + trial));
      SolverConfig cfg;
      cfg.noise_norm = levels[li];
      const ReconstructionResult res = fista_qe(ins.A, ins.b, cfg);
      const Eigen::VectorXd eigs = hermitian_eigenvalues(res.X);
      const double l2 = eigs.tail(eigs.size() - 1).head(9).cwiseAbs().maxCoeff();
      qe_worst_l2 = std::max(qe_worst_l2, l2);
    }
  }
  if (qe_worst_l2 > 1e-6)
    return {false, fmt("qe tail eigenvalue %.2e exceeds 1e-6", qe_worst_l2)};

  double rw_best_l2 = 0.0;
  for (int li = 2; li < 4; ++li) {
    for (int trial = 0; trial < 5; ++trial) {
      const SolvedTrial ins =
          make_instance(32, 32, 3, levels[li], Rng::mix(6100 + li, 100 + trial));
      SolverConfig cfg;
      cfg.method = Method::reweighted;
      cfg.noise_norm = levels[li];
      const ReconstructionResult res = fista_reweighted(ins.A, ins.b, cfg);
      const Eigen::VectorXd eigs = hermitian_eigenvalues(res.X);
      rw_best_l2 = std::max(rw_best_l2, std::abs(eigs(1)));
    }
  }
  const bool pass = rw_best_l2 > 1e-3;
  return {pass, fmt("qe max tail eig=%.2e; reweighted max lambda2=%.2e", qe_worst_l2,
                    rw_best_l2)};
}

// Mean Frobenius distance to the ground-truth lift (the ground truth is
// unit-norm, so this is already normalized), averaged over five shared
// instances per grid size with fresh 10% noise per size.
Outcome criterion_oversampling_study() {
  const int grids[] = {25, 50, 75};
  double mean_e[3] = {0.0, 0.0, 0.0};
  for (int trial = 0; trial < 5; ++trial) {
    const std::uint64_t seed = Rng::mix(5208, trial);
    const ComplexTensor x0 = generate_ground_truth(25, 1, Rng::mix(seed, 1));
    const MaskSet masks = generate_masks(25, 1, 2, Rng::mix(seed, 2));
    const Eigen::VectorXcd v0 = vectorize(x0);
    const Eigen::MatrixXcd X0 = v0 * v0.adjoint();
    for (int mi = 0; mi < 3; ++mi) {
      MeasurementOperator A(25, 1, FrequencyGrid::regular(grids[mi], 1), masks);
      const MeasurementVector b_clean = A.forward(X0);
      const double target = 0.1 * b_clean.values.norm();
      const MeasurementVector b = add_noise(b_clean, target, Rng::mix(seed, 10 + mi));
      SolverConfig cfg;
      cfg.noise_norm = target;
      const ReconstructionResult res = fista_qe(A, b, cfg);
      mean_e[mi] += (res.X - X0).norm() / 5.0;
    }
  }
  const bool improves = mean_e[1] < mean_e[0];
  const bool saturates = std::abs(mean_e[2] - mean_e[1]) <= 0.2 * mean_e[1];
  return {improves && saturates,
          fmt("mean frob err: m=n %.4f, m=2n %.4f, m=3n %.4f", mean_e[0], mean_e[1],
              mean_e[2])};
}

Outcome criterion_determinism() {
  ExperimentConfig cfg;
  cfg.n = 6;
  cfg.d = 1;
  cfg.m = {6, 8};
  cfg.masks = 1;
  cfg.methods = {Method::qe, Method::nuclear};
  cfg.noise_mode = NoiseMode::absolute;
  cfg.noise_levels = {0.0, 0.5};
  cfg.trials = 2;
  cfg.seed = 77;
  cfg.solver.iterations = 400;

  const fs::path dir_a = fs::temp_directory_path() / "qelift_acceptance_a";
  const fs::path dir_b = fs::temp_directory_path() / "qelift_acceptance_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  fs::create_directories(dir_a);
  fs::create_directories(dir_b);

  cfg.output_dir = dir_a.string();
  const SweepOutput out_a = run_sweep(cfg);
  cfg.output_dir = dir_b.string();
  const SweepOutput out_b = run_sweep(cfg);

  const std::string results_a = slurp(out_a.results_path);
  const bool same_results = !results_a.empty() && results_a == slurp(out_b.results_path);
  const std::string summary_a = slurp(out_a.summary_path);
  const bool same_summary = !summary_a.empty() && summary_a == slurp(out_b.summary_path);
  return {same_results && same_summary,
          fmt("%d rows; results.csv %sidentical, summary.csv %sidentical", out_a.rows,
              same_results ? "" : "NOT ", same_summary ? "" : "NOT ")};
}

int invariant_fixed_points() {
  Rng rng(881);
  int failures = 0;
  for (int c = 0; c < 80; ++c) {
    const int len = 2 + int(rng.below(5));
    const int K = 1 + int(rng.below(std::uint64_t(len)));
    Eigen::VectorXd y = Eigen::VectorXd::Zero(len);
    for (int i = 0; i < std::min(K, len); ++i) y(i) = 4.0 * rng.uniform();
    std::sort(y.data(), y.data() + len, std::greater<double>());
    const double gamma = 0.5 + rng.uniform();
    const ProxParams p(K, gamma, gamma * (1.5 + rng.uniform()));
    if ((prox_qe_scalar(y, p) - y).cwiseAbs().maxCoeff() != 0.0) ++failures;
  }
  return failures;
}

int invariant_permutation() {
  Rng rng(882);
  int failures = 0;
  for (int len = 2; len <= 5; ++len) {
    for (int rep = 0; rep < 2; ++rep) {
      Eigen::VectorXd y(len);
      for (int i = 0; i < len; ++i) y(i) = 3.0 * rng.normal();
      const int K = 1 + int(rng.below(std::uint64_t(len)));
      const ProxParams p(K, 1.0, 2.5);
      const Eigen::VectorXd x = prox_qe_scalar(y, p);
      std::vector<int> perm(len);
      std::iota(perm.begin(), perm.end(), 0);
      do {
        Eigen::VectorXd yp(len);
        for (int i = 0; i < len; ++i) yp(i) = y(perm[i]);
        const Eigen::VectorXd xp = prox_qe_scalar(yp, p);
        for (int i = 0; i < len; ++i)
          if (xp(i) != x(perm[i])) ++failures;
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  }
  return failures;
}

int invariant_unitary() {
  Rng rng(883);
  int failures = 0;
  for (int c = 0; c < 6; ++c) {
    const int n = 3 + int(rng.below(3));
    const ProxParams p(1 + int(rng.below(2)), 1.0, 2.0 + rng.uniform());
    const Eigen::MatrixXcd X = random_hermitian(rng, n);
    Eigen::MatrixXcd G(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) G(i, j) = rng.complex_normal();
    const Eigen::MatrixXcd U =
        Eigen::HouseholderQR<Eigen::MatrixXcd>(G).householderQ();
    const Eigen::MatrixXcd lhs = prox_qe_hermitian(U * X * U.adjoint(), p);
    const Eigen::MatrixXcd rhs = U * prox_qe_hermitian(X, p) * U.adjoint();
    if ((lhs - rhs).norm() > 1e-10 * std::max(1.0, rhs.norm())) ++failures;
  }
  return failures;
}

int invariant_branch_b(double* worst_residual) {
  Rng rng(884);
  int failures = 0;
  *worst_residual = 0.0;
  const double gammas[] = {0.5, 1.0, 2.0};
  for (int c = 0; c < 250; ++c) {
    const int len = 3 + int(rng.below(4));
    const int K = 1 + int(rng.below(std::uint64_t(len - 1)));
    const double gamma = gammas[rng.below(3)];
    const double rho = gamma * (rng.bernoulli() ? 1.5 : 3.0);
    const double r = rho / gamma;
    Eigen::VectorXd y(len);
    for (int i = 0; i < K; ++i) y(i) = 1.0 + 3.0 * rng.uniform();
    std::sort(y.data(), y.data() + K, std::greater<double>());
    y(K) = y(K - 1) * (0.9 + 0.1 * rng.uniform());
    for (int i = K + 1; i < len; ++i) y(i) = y(K) * rng.uniform();
    std::sort(y.data() + K, y.data() + len, std::greater<double>());

    const Eigen::VectorXd z = prox_s_inner(y, ProxParams(K, gamma, rho));
    const double s = z(K);
    const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
    bool ok = s >= y(K - 1) - 1e-9 * scale && s <= r * y(K) + 1e-9 * scale;
    int head_clamped = 0, tail_clamped = 0;
    double clamped_sum = 0.0;
    for (int i = 0; i < len; ++i) {
      if (std::abs(z(i) - s) <= 1e-13 * scale) {
        (i < K ? head_clamped : tail_clamped) += 1;
        clamped_sum += y(i);
      }
      if (i + 1 < len && z(i) < z(i + 1) - 1e-12 * scale) ok = false;
    }
    const double fprime = 2.0 * s * (rho * head_clamped + gamma * tail_clamped) -
                          2.0 * rho * clamped_sum;
    const double rel = std::abs(fprime) / std::max(1.0, 2.0 * rho * y.cwiseAbs().sum());
    *worst_residual = std::max(*worst_residual, rel);
    if (head_clamped < 1 || tail_clamped < 1 || rel > 1e-9) ok = false;
    if (!ok) ++failures;
  }
  return failures;
}

int invariant_hermitian_measurement() {
  Rng rng(885);
  int failures = 0;
  for (int c = 0; c < 4; ++c) {
    const int n = 3 + c;
    const MeasurementOperator A(n, 1, FrequencyGrid::regular(n + c % 2, 1),
                                random_masks(rng, n, c % 3));
    const Eigen::MatrixXcd X = random_hermitian(rng, n);
    MeasurementVector b = A.forward(X);
    for (Eigen::Index i = 0; i < b.values.size(); ++i) b.values(i) += rng.normal();
    const Eigen::MatrixXcd G = A.gradient(X, b);
    if ((G - G.adjoint()).norm() != 0.0) ++failures;

    const Eigen::VectorXcd v = random_complex_vector(rng, n);
    const MeasurementVector psd = A.forward(v * v.adjoint());
    const double scale = psd.values.cwiseAbs().maxCoeff();
    if (psd.values.imag().cwiseAbs().maxCoeff() > 1e-12 * scale) ++failures;
  }
  return failures;
}

int invariant_indexing() {
  int failures = 0;
  for (int n = 1; n <= 6; ++n) {
    for (int d = 1; d <= 3; ++d) {
      IndexBijection map(n, d);
      for (Eigen::Index f = 0; f < map.size(); ++f)
        if (map.flat(map.multi(f)) != f) ++failures;
      std::size_t bound = 1;
      for (int a = 0; a < d; ++a) bound *= std::size_t(2 * n - 1);
      if (difference_indices(n, d).size() != bound) ++failures;
    }
  }
  return failures;
}

int invariant_metrics() {
  Rng rng(886);
  int failures = 0;
  for (int c = 0; c < 15; ++c) {
    const Eigen::VectorXcd x0 = random_complex_vector(rng, 6);
    const Eigen::VectorXcd xt = random_complex_vector(rng, 6);
    const double closed = phase_distance(x0, xt);
    const double grid = testing::grid_phase_distance(x0, xt);
    if (std::abs(closed - grid) > 1e-8 * std::max(1.0, grid)) ++failures;
  }
  for (int c = 0; c < 5; ++c) {
    const Eigen::MatrixXcd X = random_hermitian(rng, 6);
    const Eigen::VectorXd head = eigen_table(X, 5);
    for (int i = 0; i + 1 < head.size(); ++i)
      if (head(i) < head(i + 1)) ++failures;
  }
  return failures;
}

Outcome criterion_invariants() {
  double branch_b_residual = 0.0;
  const int fixed = invariant_fixed_points();
  const int perm = invariant_permutation();
  const int unitary = invariant_unitary();
  const int branchb = invariant_branch_b(&branch_b_residual);
  const int herm = invariant_hermitian_measurement();
  const int indexing = invariant_indexing();
  const int metrics = invariant_metrics();
  const int total = fixed + perm + unitary + branchb + herm + indexing + metrics;
  return {total == 0,
          fmt("failures: fixed=%d perm=%d unitary=%d branch-b=%d (res %.1e) "
              "hermitian=%d indexing=%d metrics=%d",
              fixed, perm, unitary, branchb, branch_b_residual, herm, indexing,
              metrics)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"prox oracle equivalence", criterion_prox_oracle},
      {"fft forward/gradient correctness", criterion_fft},
      {"oversampling rank law", criterion_rank_law},
      {"operator norm bounds", criterion_norm_bounds},
      {"noiseless recovery", criterion_noiseless_recovery},
      {"rank-1 property under noise", criterion_rank_one_under_noise},
      {"oversampling study", criterion_oversampling_study},
      {"sweep determinism", criterion_determinism},
      {"invariant suites", criterion_invariants},
  };

  int passed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %zu. %s: %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].name, out.detail.c_str(), seconds);
    std::fflush(stdout);
    if (out.pass) ++passed;
  }
  std::printf("acceptance: %d/%zu criteria passed\n", passed, criteria.size());
  return passed == int(criteria.size()) ? 0 : 3;
}
