#include "qelift/prox.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace qelift {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_sorted(const Eigen::VectorXd& y) {
  for (Eigen::Index i = 0; i + 1 < y.size(); ++i)
    if (y(i) < y(i + 1))
      throw InputError("input spectrum must be non-increasing");
}

// Objective whose minimizer prox_s_inner returns; used only as a fallback
// discriminator between breakpoint candidates under floating-point ties.
double inner_objective(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                       const ProxParams& p) {
  double top = 0.0;
  for (int i = 0; i < p.K && i < x.size(); ++i) top += std::pow(std::max(x(i), 0.0), 2);
  return (p.rho - p.gamma) * (top - x.squaredNorm()) + p.rho * (y - x).squaredNorm();
}

Eigen::VectorXd clamp_pattern(const Eigen::VectorXd& y, double s, int K, double r) {
  Eigen::VectorXd x(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i)
    x(i) = (i < K) ? std::max(s, y(i)) : std::min(s, r * y(i));
  return x;
}

struct EigenDecomposition {
  Eigen::VectorXd values;  // ascending, Eigen's native order
  Eigen::MatrixXcd vectors;
};

EigenDecomposition decompose(const Eigen::MatrixXcd& X) {
  if (X.rows() != X.cols())
    throw DimensionError("matrix prox requires a square matrix, got " +
                         std::to_string(X.rows()) + "x" + std::to_string(X.cols()));
  const Eigen::MatrixXcd Xh = 0.5 * (X + X.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Xh);
  if (es.info() != Eigen::Success)
    throw NumericalError("Hermitian eigendecomposition failed on a " +
                         std::to_string(X.rows()) + "x" + std::to_string(X.cols()) +
                         " matrix (norm " + std::to_string(Xh.norm()) + ")");
  return {es.eigenvalues(), es.eigenvectors()};
}

Eigen::MatrixXcd recompose(const EigenDecomposition& ed, const Eigen::VectorXd& values) {
  Eigen::MatrixXcd Z =
      ed.vectors * values.asDiagonal() * ed.vectors.adjoint();
  return 0.5 * (Z + Z.adjoint());
}

}  // namespace

ProxParams::ProxParams(int K, double gamma, double rho) : K(K), gamma(gamma), rho(rho) {
  if (K < 1) throw ParameterError("target rank K must be >= 1");
  if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
  if (!(rho > gamma))
    throw ParameterError("rho must exceed gamma (got rho=" + std::to_string(rho) +
                         ", gamma=" + std::to_string(gamma) + ")");
}

SortedSpectrum SortedSpectrum::sort(const Eigen::VectorXd& y) {
  SortedSpectrum s;
  s.order.resize(y.size());
  std::iota(s.order.begin(), s.order.end(), Eigen::Index(0));
  std::stable_sort(s.order.begin(), s.order.end(),
                   [&y](Eigen::Index a, Eigen::Index b) { return y(a) > y(b); });
  s.values.resize(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) s.values(i) = y(s.order[i]);
  return s;
}

Eigen::VectorXd SortedSpectrum::unsort(const Eigen::VectorXd& sorted_vals) const {
  Eigen::VectorXd out(sorted_vals.size());
  for (Eigen::Index i = 0; i < sorted_vals.size(); ++i) out(order[i]) = sorted_vals(i);
  return out;
}

double s_transform(const Eigen::VectorXd& y, int K, double gamma) {
  if (K < 1) throw ParameterError("K must be >= 1");
  if (K > y.size())
    throw ParameterError("K = " + std::to_string(K) + " exceeds vector length " +
                         std::to_string(y.size()));
  Eigen::VectorXd sorted = SortedSpectrum::sort(y).values;
  double top = 0.0;
  for (int i = 0; i < K; ++i) top += std::pow(std::max(sorted(i), 0.0), 2);
  return 0.5 * gamma * (top - y.squaredNorm());
}

double envelope_value(const Eigen::VectorXd& y, int K, double gamma,
                      Eigen::VectorXd* sup_point) {
  if (K < 1) throw ParameterError("K must be >= 1");
  if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
  if (y.size() == 0) return 0.0;
  if (y.minCoeff() < 0.0) return kInf;

  const SortedSpectrum ss = SortedSpectrum::sort(y);
  const Eigen::VectorXd& v = ss.values;
  const Eigen::Index L = v.size();
  const Eigen::Index head = std::min<Eigen::Index>(K, L);

  double tail_sum = 0.0;
  for (Eigen::Index i = head; i < L; ++i) tail_sum += v(i);

  // The inner supremum reduces to a scalar level tau >= 0: the maximizer is
  // w_i = max(v_i, tau) on the first `head` coordinates and tau beyond. Its
  // derivative in tau is piecewise linear and non-increasing, so the level
  // is found by scanning the head values in ascending order.
  double tau = 0.0;
  if (tail_sum > 0.0) {
    double partial = 0.0;  // sum of the c smallest head values
    bool found = false;
    for (Eigen::Index c = 1; c <= head; ++c) {
      const double lo = v(head - c);  // c-th smallest head value
      partial += lo;
      const double candidate = (partial + tail_sum) / double(c);
      const double hi = (c == head) ? kInf : v(head - c - 1);
      if (candidate >= lo && candidate <= hi) {
        tau = candidate;
        found = true;
        break;
      }
    }
    if (!found) tau = (partial + tail_sum) / double(head);
  } else {
    // Flat supremum: every level in [0, smallest head value] attains it.
    // Report the right edge, which is the limit of the maximizer from
    // nearby points with positive tail mass, so that consumers of the
    // maximizer get one-sided derivatives consistent with the domain.
    tau = v(head - 1);
  }

  double sup = tau * tail_sum;
  Eigen::VectorXd w = Eigen::VectorXd::Constant(L, tau);
  for (Eigen::Index i = 0; i < head; ++i) {
    w(i) = std::max(v(i), tau);
    sup += v(i) * w(i) - 0.5 * w(i) * w(i);
  }
  if (sup_point != nullptr) *sup_point = ss.unsort(w);
  return gamma * sup - 0.5 * gamma * y.squaredNorm();
}

Eigen::VectorXd prox_s_inner(const Eigen::VectorXd& y, const ProxParams& p) {
  require_sorted(y);
  const Eigen::Index L = y.size();
  if (L == 0) return y;
  const double r = p.rho / p.gamma;
  const int K = p.K;

  // Past-the-end rank behaves as if y_{K+1} = -inf, which always lands in
  // the first branch.
  const bool first_branch = K >= L || y(K - 1) < 0.0 || y(K - 1) >= r * y(K);

  if (first_branch) {
    Eigen::Index keep = 0;  // last index with y >= 0, as a count
    for (Eigen::Index i = 0; i < L; ++i)
      if (y(i) >= 0.0) keep = i + 1;
    keep = std::min<Eigen::Index>(keep, K);
    Eigen::VectorXd x(L);
    for (Eigen::Index i = 0; i < L; ++i) x(i) = (i < keep) ? y(i) : r * y(i);
    return x;
  }

  // Second branch: the K-th and (K+1)-th outputs coalesce at a level s in
  // V = [y_K, r*y_{K+1}]. Candidate levels are stationary points of the
  // objective restricted to each gap between consecutive breakpoints.
  Eigen::Index jstar = K - 1;  // smallest 0-based j with yetc(j) <= r*y(K)
  while (jstar > 0 && y(jstar - 1) <= r * y(K)) --jstar;
  Eigen::Index lstar = K;  // largest 0-based l with r*y(l) >= y(K-1)
  while (lstar + 1 < L && r * y(lstar + 1) >= y(K - 1)) ++lstar;

  std::vector<double> brk;
  for (Eigen::Index i = jstar; i < K; ++i) brk.push_back(y(i));
  for (Eigen::Index i = K; i <= lstar; ++i) brk.push_back(r * y(i));
  std::sort(brk.begin(), brk.end(), std::greater<double>());

  // Stationary level for the clamp pattern active at `level`.
  const auto stationary = [&](double level) {
    Eigen::Index j0 = K - 1;  // smallest 0-based index with y <= level
    while (j0 > 0 && y(j0 - 1) <= level) --j0;
    Eigen::Index l0 = K;  // largest 0-based index with r*y >= level
    while (l0 + 1 < L && r * y(l0 + 1) >= level) ++l0;
    double sum = 0.0;
    for (Eigen::Index i = j0; i <= l0; ++i) sum += y(i);
    const double denom = p.rho * double(K - j0) + p.gamma * double(l0 - K + 1);
    return p.rho * sum / denom;
  };

  for (std::size_t t = 0; t + 1 < brk.size(); ++t) {
    const double hi = brk[t], lo = brk[t + 1];
    if (!(lo < hi)) continue;
    const double s = stationary(0.5 * (hi + lo));
    if (s >= lo && s <= hi) return clamp_pattern(y, s, K, r);
  }

  // Floating-point corner: no gap accepted its stationary level. The
  // minimizer then sits at a breakpoint; pick the best one directly.
  double best = kInf;
  Eigen::VectorXd best_x;
  for (double s : brk) {
    Eigen::VectorXd x = clamp_pattern(y, s, K, r);
    const double f = inner_objective(y, x, p);
    if (f < best) {
      best = f;
      best_x = std::move(x);
    }
  }
  return best_x;
}

Eigen::VectorXd prox_qe_scalar(const Eigen::VectorXd& y, const ProxParams& p) {
  const SortedSpectrum ss = SortedSpectrum::sort(y);
  const Eigen::VectorXd z = prox_s_inner(ss.values, p);
  // Algebraically (rho*y - gamma*z) / (rho - gamma), arranged as a
  // correction to y so entries the inner step left untouched pass through
  // bit-exactly.
  const Eigen::VectorXd out =
      ss.values + p.gamma / (p.rho - p.gamma) * (ss.values - z);
  return ss.unsort(out);
}

Eigen::MatrixXcd prox_qe_hermitian(const Eigen::MatrixXcd& X, const ProxParams& p) {
  const EigenDecomposition ed = decompose(X);
  return recompose(ed, prox_qe_scalar(ed.values, p));
}

Eigen::MatrixXcd prox_nuclear_psd(const Eigen::MatrixXcd& X, double tau) {
  if (!(tau >= 0.0)) throw ParameterError("nuclear prox threshold must be >= 0");
  const EigenDecomposition ed = decompose(X);
  const Eigen::VectorXd values = (ed.values.array() - tau).max(0.0);
  return recompose(ed, values);
}

Eigen::MatrixXcd prox_nuclear_psd_weighted(const Eigen::MatrixXcd& X,
                                           const Eigen::VectorXd& thresholds) {
  const EigenDecomposition ed = decompose(X);
  const Eigen::Index N = ed.values.size();
  if (thresholds.size() != N)
    throw DimensionError("need one threshold per eigenvalue");
  if (thresholds.minCoeff() < 0.0)
    throw ParameterError("nuclear prox thresholds must be >= 0");
  Eigen::VectorXd values(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    // ed.values is ascending; thresholds index the i-th largest eigenvalue.
    values(i) = std::max(ed.values(i) - thresholds(N - 1 - i), 0.0);
  }
  return recompose(ed, values);
}

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& X) {
  if (X.rows() == 0) return Eigen::VectorXd(0);
  return decompose(X).values.reverse();
}

}  // namespace qelift
