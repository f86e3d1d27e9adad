#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qelift/errors.hpp"

namespace qelift {

// Parameters of the quadratic-envelope proximal step. The envelope carries
// stiffness gamma; the prox is taken with weight rho. rho > gamma keeps the
// prox single-valued.
struct ProxParams {
  int K;
  double gamma;
  double rho;

  ProxParams(int K, double gamma, double rho);
};

// A real vector together with the permutation that sorted it, so results
// computed on the sorted values can be routed back to the original order.
struct SortedSpectrum {
  Eigen::VectorXd values;             // non-increasing
  std::vector<Eigen::Index> order;    // order[i] = original position of values[i]

  static SortedSpectrum sort(const Eigen::VectorXd& y);
  Eigen::VectorXd unsort(const Eigen::VectorXd& sorted_vals) const;
};

// Partial quadratic conjugate of the constrained-support indicator (at most
// K nonzero entries, all non-negative) evaluated at y:
//   (gamma/2) * (sum of the K largest max(y_i, 0)^2  -  ||y||^2),
// which equals the supremum of -(gamma/2)||x - y||^2 over feasible x.
double s_transform(const Eigen::VectorXd& y, int K, double gamma);

// Quadratic envelope of the constrained-support indicator, evaluated from
// its nested-conjugate definition. +inf off the non-negative orthant. Also
// returns the maximizing point of the inner supremum in *sup_point when
// non-null (used for envelope gradients).
double envelope_value(const Eigen::VectorXd& y, int K, double gamma,
                      Eigen::VectorXd* sup_point = nullptr);

// Minimizer of
//   (rho - gamma) * (sum_{i<=K} max(x_i,0)^2 - ||x||^2) + rho * ||x - y||^2
// over non-increasing x, for non-increasing y. Core of the envelope prox.
Eigen::VectorXd prox_s_inner(const Eigen::VectorXd& y_sorted, const ProxParams& p);

// Prox of (1/rho) * envelope at y, componentwise on the spectrum: sorts y,
// runs prox_s_inner, recombines as (rho*y - gamma*z)/(rho - gamma), and
// restores the original order.
Eigen::VectorXd prox_qe_scalar(const Eigen::VectorXd& y, const ProxParams& p);

// Spectral lift of prox_qe_scalar: eigendecompose (X + X*)/2, apply the
// scalar prox to the eigenvalues, recombine with unchanged eigenvectors.
Eigen::MatrixXcd prox_qe_hermitian(const Eigen::MatrixXcd& X, const ProxParams& p);

// Prox of tau * nuclear norm restricted to the PSD cone: eigenvalues are
// soft-thresholded by tau and clipped at zero.
Eigen::MatrixXcd prox_nuclear_psd(const Eigen::MatrixXcd& X, double tau);

// Weighted variant: thresholds[i] applies to the i-th largest eigenvalue.
Eigen::MatrixXcd prox_nuclear_psd_weighted(const Eigen::MatrixXcd& X,
                                           const Eigen::VectorXd& thresholds);

// Eigenvalues of (X + X*)/2 in non-increasing order.
Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& X);

}  // namespace qelift
