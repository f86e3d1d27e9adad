#include "qelift/metrics.hpp"

#include <cmath>
#include <string>

#include "qelift/prox.hpp"

namespace qelift {

double phase_distance(const Eigen::VectorXcd& x0, const Eigen::VectorXcd& xt) {
  if (x0.size() != xt.size())
    throw DimensionError("phase distance needs equal lengths, got " +
                         std::to_string(x0.size()) + " and " + std::to_string(xt.size()));
  const double d =
      x0.squaredNorm() + xt.squaredNorm() - 2.0 * std::abs(x0.dot(xt));
  return std::max(d, 0.0);
}

int numerical_rank(const Eigen::MatrixXcd& X, double tol, bool relative) {
  if (!(tol > 0.0)) throw ParameterError("rank tolerance must be positive");
  const Eigen::VectorXd eigs = hermitian_eigenvalues(X);
  if (eigs.size() == 0) return 0;
  const double scale = relative ? eigs.array().abs().maxCoeff() : 1.0;
  return static_cast<int>((eigs.array().abs() > tol * scale).count());
}

Eigen::VectorXd eigen_table(const Eigen::MatrixXcd& X, int count) {
  if (count < 0 || count > X.rows())
    throw ParameterError("eigenvalue count must lie in 0..N");
  return hermitian_eigenvalues(X).head(count);
}

}  // namespace qelift
