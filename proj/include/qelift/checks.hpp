#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "qelift/prox.hpp"

namespace qelift {

// Numerical reference minimizer of the envelope prox objective
//   H(x) = Q(x) + (rho/2) ||x - y||^2
// over the non-negative orthant, by projected gradient descent driven by
// the envelope's maximizer report. It shares no code with the closed-form
// prox it is used to cross-check.
Eigen::VectorXd oracle_prox_minimizer(const Eigen::VectorXd& y, const ProxParams& p,
                                      int max_iterations = 20000);

struct ProxCheckReport {
  int cases = 0;
  int failures = 0;
  double max_error = 0.0;   // worst per-coordinate deviation seen
  std::string worst_case;   // inputs of the worst case, for reproduction
};

// Randomized agreement check between the closed-form prox and the
// numerical minimizer: lengths 1..6, every admissible K, gamma in
// {0.5, 1, 2}, rho in {1.5, 3} * gamma, with ties, zeros, and negative
// entries injected into the inputs.
ProxCheckReport run_prox_check(int cases, std::uint64_t seed, double tol = 1e-6);

struct GradCheckReport {
  int cases = 0;
  int failures = 0;
  double max_forward_rel = 0.0;      // transform vs rank-one forward
  double max_gradient_rel = 0.0;     // transform vs rank-one gradient
  double max_directional_err = 0.0;  // analytic vs central differences
};

// Sweeps n in {2..5}, d in {1,2}, m in {n..2n}, and 0..3 masks, comparing
// the transform-accelerated forward and gradient against the rank-one
// reference path and validating directional derivatives of the data-fit
// term by central differences.
GradCheckReport run_grad_check(std::uint64_t seed, double pair_tol = 1e-10,
                               double fd_tol = 1e-5);

}  // namespace qelift
