#include "qelift/checks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qelift/harness.hpp"
#include "qelift/measurement.hpp"
#include "qelift/rng.hpp"

namespace qelift {

Eigen::VectorXd oracle_prox_minimizer(const Eigen::VectorXd& y, const ProxParams& p,
                                      int max_iterations) {
  const Eigen::Index L = y.size();
  Eigen::VectorXd x = y.cwiseMax(0.0);
  if (L == 0) return x;

  // The envelope gradient is gamma * (w - x) with w the inner maximizer,
  // and its curvature is bounded by gamma * (1 + sqrt(L)); the data term
  // adds rho. Half the inverse bound keeps the iteration a contraction.
  const double lipschitz = p.gamma * (1.0 + std::sqrt(double(L))) + p.rho;
  const double step = 0.5 / lipschitz;

  Eigen::VectorXd w(L);
  for (int k = 0; k < max_iterations; ++k) {
    envelope_value(x, p.K, p.gamma, &w);
    const Eigen::VectorXd grad = p.gamma * (w - x) + p.rho * (x - y);
    Eigen::VectorXd next = (x - step * grad).cwiseMax(0.0);
    const double move = (next - x).lpNorm<Eigen::Infinity>();
    x = std::move(next);
    if (move < 1e-16 * (1.0 + x.lpNorm<Eigen::Infinity>())) break;
  }
  return x;
}

namespace {

std::string describe_case(const Eigen::VectorXd& y, const ProxParams& p) {
  std::ostringstream out;
  out << "K=" << p.K << " gamma=" << p.gamma << " rho=" << p.rho << " y=[";
  for (Eigen::Index i = 0; i < y.size(); ++i) out << (i > 0 ? " " : "") << y(i);
  out << "]";
  return out.str();
}

}  // namespace

ProxCheckReport run_prox_check(int cases, std::uint64_t seed, double tol) {
  if (cases < 1) throw InputError("case count must be >= 1");
  ProxCheckReport report;
  Rng rng(seed);
  const double gammas[] = {0.5, 1.0, 2.0};

  for (int c = 0; c < cases; ++c) {
    const int len = 1 + int(rng.below(6));
    const int K = 1 + int(rng.below(std::uint64_t(len)));
    const double gamma = gammas[rng.below(3)];
    const double rho = gamma * (rng.bernoulli() ? 1.5 : 3.0);
    const ProxParams p(K, gamma, rho);

    Eigen::VectorXd y(len);
    for (int i = 0; i < len; ++i) y(i) = 3.0 * rng.normal();
    if (rng.uniform() < 0.3) y(Eigen::Index(rng.below(std::uint64_t(len)))) = 0.0;
    if (len >= 2 && rng.uniform() < 0.3) {
      const Eigen::Index a = Eigen::Index(rng.below(std::uint64_t(len)));
      const Eigen::Index b = Eigen::Index(rng.below(std::uint64_t(len)));
      y(a) = y(b);
    }

    const Eigen::VectorXd closed = prox_qe_scalar(y, p);
    const Eigen::VectorXd numeric = oracle_prox_minimizer(y, p);
    const double err = (closed - numeric).lpNorm<Eigen::Infinity>();

    report.cases += 1;
    if (err > report.max_error) {
      report.max_error = err;
      report.worst_case = describe_case(y, p);
    }
    if (!(err <= tol)) report.failures += 1;
  }
  return report;
}

GradCheckReport run_grad_check(std::uint64_t seed, double pair_tol, double fd_tol) {
  GradCheckReport report;
  constexpr double kStep = 1e-4;

  for (int n = 2; n <= 5; ++n)
    for (int d = 1; d <= 2; ++d)
      for (int m = n; m <= 2 * n; ++m)
        for (int n_masks = 0; n_masks <= 3; ++n_masks) {
          const std::uint64_t combo = Rng::mix(
              seed, std::uint64_t(((n * 10 + d) * 100 + m) * 10 + n_masks));
          Rng rng(Rng::mix(combo, 0));
          const MaskSet masks = generate_masks(n, d, n_masks, Rng::mix(combo, 1));
          const MeasurementOperator A(n, d, FrequencyGrid::regular(m, d), masks);
          const Eigen::Index N = A.N();

          Eigen::MatrixXcd X(N, N);
          for (Eigen::Index i = 0; i < N; ++i)
            for (Eigen::Index j = 0; j < N; ++j) X(i, j) = rng.complex_normal();
          X = 0.5 * (X + X.adjoint()).eval();

          MeasurementVector b = A.forward_naive(X);
          for (Eigen::Index i = 0; i < b.values.size(); ++i)
            b.values(i) += 0.5 * rng.complex_normal();

          const MeasurementVector c_fast = A.forward_fft(X);
          const MeasurementVector c_ref = A.forward_naive(X);
          const double fwd_rel =
              (c_fast.values - c_ref.values).norm() / std::max(c_ref.values.norm(), 1e-300);

          const Eigen::MatrixXcd g_fast = A.gradient_fft(X, b);
          const Eigen::MatrixXcd g_ref = A.gradient_naive(X, b);
          const double grad_rel =
              (g_fast - g_ref).norm() / std::max(g_ref.norm(), 1e-300);

          // Directional derivative of the data-fit term along two random
          // Hermitian directions, against central differences.
          double dir_err = 0.0;
          const auto objective = [&](const Eigen::MatrixXcd& Z) {
            return 0.5 * (A.forward(Z).values - b.values).squaredNorm();
          };
          for (int rep = 0; rep < 2; ++rep) {
            Eigen::MatrixXcd D(N, N);
            for (Eigen::Index i = 0; i < N; ++i)
              for (Eigen::Index j = 0; j < N; ++j) D(i, j) = rng.complex_normal();
            D = (0.5 * (D + D.adjoint())).eval();
            D /= D.norm();
            const double fd =
                (objective(X + kStep * D) - objective(X - kStep * D)) / (2.0 * kStep);
            const double analytic = g_ref.cwiseProduct(D.conjugate()).sum().real();
            dir_err = std::max(dir_err,
                               std::abs(fd - analytic) / std::max(1.0, std::abs(analytic)));
          }

          report.cases += 1;
          report.max_forward_rel = std::max(report.max_forward_rel, fwd_rel);
          report.max_gradient_rel = std::max(report.max_gradient_rel, grad_rel);
          report.max_directional_err = std::max(report.max_directional_err, dir_err);
          if (!(fwd_rel <= pair_tol) || !(grad_rel <= pair_tol) || !(dir_err <= fd_tol))
            report.failures += 1;
        }
  return report;
}

}  // namespace qelift
