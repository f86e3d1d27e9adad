#pragma once

#include <Eigen/Dense>

#include "qelift/errors.hpp"

namespace qelift {

// Per-trial evaluation of a reconstruction against its ground truth.
struct TrialMetrics {
  double phase_dist = 0.0;   // min over unit phases c of ||c*x0 - xt||^2
  double frob_err = 0.0;     // ||X_tilde - x0 x0*||_F
  double residual = 0.0;     // ||A(X_tilde) - b||
  double nsr = 0.0;          // ||eps|| / ||b_clean||
  int rank_tight = 0;        // numerical rank at 1e-6
  int rank_loose = 0;        // numerical rank at 1e-3
  Eigen::VectorXd top_eigs;  // ten leading eigenvalues
};

// Squared distance between complex signals modulo a global phase, in closed
// form: ||x0||^2 + ||xt||^2 - 2*|<x0, xt>|.
double phase_distance(const Eigen::VectorXcd& x0, const Eigen::VectorXcd& xt);

// Count of eigenvalues of (X + X*)/2 with |lambda| above the tolerance.
// The tolerance is absolute by default; with relative=true it is scaled by
// the largest eigenvalue magnitude.
int numerical_rank(const Eigen::MatrixXcd& X, double tol, bool relative = false);

// Leading `count` eigenvalues in non-increasing order.
Eigen::VectorXd eigen_table(const Eigen::MatrixXcd& X, int count = 10);

}  // namespace qelift
