#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "qelift/errors.hpp"
#include "qelift/indexing.hpp"

namespace qelift {

// Frequency sampling set. Regular mode is the full grid {0..m-1}^d with
// unit-modulus atoms e^{-2 pi i <k, j> / m}; explicit mode is an arbitrary
// list of real frequency vectors zeta with atoms e^{i <zeta, j>}.
class FrequencyGrid {
public:
  static FrequencyGrid regular(int m, int d);
  // One frequency vector per row, d columns.
  static FrequencyGrid explicit_list(Eigen::MatrixXd zetas);

  bool regular_mode() const { return regular_; }
  int m() const;                       // regular mode only
  int d() const { return d_; }
  Eigen::Index count() const;          // |S|
  // Frequency vector of sample k (explicit list, or -2*pi*k/m on the grid
  // so that e^{i <zeta, j>} reproduces the grid atoms).
  Eigen::VectorXd frequency(Eigen::Index k) const;

private:
  FrequencyGrid() = default;
  bool regular_ = true;
  int m_ = 0;
  int d_ = 0;
  Eigen::MatrixXd zetas_;
};

// Binary spatial filters over the object grid, stored vectorized. The
// measurement layout always carries an implicit unmasked block first.
struct MaskSet {
  std::vector<Eigen::VectorXd> masks;  // entries 0.0 or 1.0, length N each

  static MaskSet none() { return {}; }
  int count() const { return static_cast<int>(masks.size()); }
  void validate(Eigen::Index N) const;
};

// Stacked measurement blocks: block 0 is the unmasked transform, block i>0
// corresponds to mask i-1. Values are complex because noisy data is.
struct MeasurementVector {
  Eigen::VectorXcd values;
  Eigen::Index block_size = 0;

  Eigen::Index blocks() const { return block_size == 0 ? 0 : values.size() / block_size; }
  auto block(Eigen::Index i) { return values.segment(i * block_size, block_size); }
  auto block(Eigen::Index i) const { return values.segment(i * block_size, block_size); }
};

// The lifted measurement operator: X maps to the vector of <a_k a_k*, X>
// over all frequency samples and mask blocks. Regular grids get an
// FFT-accelerated forward/gradient path; the naive rank-one path serves as
// reference and handles explicit frequency lists.
class MeasurementOperator {
public:
  MeasurementOperator(int n, int d, FrequencyGrid grid, MaskSet masks);
  ~MeasurementOperator();
  MeasurementOperator(MeasurementOperator&&) noexcept;
  MeasurementOperator& operator=(MeasurementOperator&&) noexcept;
  MeasurementOperator(const MeasurementOperator&) = delete;
  MeasurementOperator& operator=(const MeasurementOperator&) = delete;

  int n() const { return n_; }
  int d() const { return d_; }
  Eigen::Index N() const { return N_; }
  const FrequencyGrid& grid() const { return grid_; }
  const MaskSet& masks() const { return masks_; }
  Eigen::Index block_count() const { return masks_.count() + 1; }
  Eigen::Index measurement_count() const { return block_count() * grid_.count(); }

  // Atom a_k of a given block (0 = unmasked), as a dense vector.
  Eigen::VectorXcd atom(Eigen::Index block, Eigen::Index k) const;

  // Diagonal-sum / fold / DFT fast path. Regular grids only.
  MeasurementVector forward_fft(const Eigen::MatrixXcd& X) const;
  // Direct rank-one evaluation; any grid.
  MeasurementVector forward_naive(const Eigen::MatrixXcd& X) const;
  // Fast path when available, naive otherwise.
  MeasurementVector forward(const Eigen::MatrixXcd& X) const;

  // Gradient of (1/2)||A(.) - b||^2 at X, symmetrized. The fast path
  // inverse-transforms the residual and fills along index differences.
  Eigen::MatrixXcd gradient_fft(const Eigen::MatrixXcd& X, const MeasurementVector& b) const;
  Eigen::MatrixXcd gradient_naive(const Eigen::MatrixXcd& X, const MeasurementVector& b) const;
  Eigen::MatrixXcd gradient(const Eigen::MatrixXcd& X, const MeasurementVector& b) const;
  // Same dispatch, also reporting the objective (1/2)||A(X) - b||^2 so the
  // solver gets both for one forward pass.
  Eigen::MatrixXcd gradient_with_objective(const Eigen::MatrixXcd& X,
                                           const MeasurementVector& b,
                                           double* objective) const;

  // Certified interval [N, M] for the operator norm; only valid at m = n
  // where the unmasked block is N times a unitary.
  std::pair<double, double> norm_bounds() const;
  // Power iteration on X -> A*(A X), returning an estimate of ||A||.
  double operator_norm(int max_iterations = 500, double rel_tol = 1e-13) const;

  // Dense M x N^2 matrixification: row (block, k) is vec(a_k a_k*)
  // conjugated so that dense * vec(X) = A(X). Guarded by entry count.
  Eigen::MatrixXcd dense_matrix() const;

private:
  MeasurementVector empty_measurement() const;
  void check_measurement(const MeasurementVector& b) const;
  Eigen::Index fold_cell(Eigen::Index j, Eigen::Index l) const;
  Eigen::MatrixXcd assemble_gradient_fft(const MeasurementVector& c,
                                         const MeasurementVector& b) const;
  Eigen::MatrixXcd assemble_gradient_naive(const MeasurementVector& c,
                                           const MeasurementVector& b) const;

  int n_ = 0;
  int d_ = 0;
  Eigen::Index N_ = 0;
  FrequencyGrid grid_;
  MaskSet masks_;
  std::vector<std::vector<Eigen::Index>> supports_;  // per block, flat indices with mask 1
  std::vector<Eigen::Index> fold_stride_;            // m^a per axis
  Eigen::MatrixXi digits_;                           // N x d multi-index table

  struct FftPlans;
  std::unique_ptr<FftPlans> fft_;
};

// Numerical rank of the dense unmasked lifted operator for a frequency set:
// the count of singular values above tol * sigma_max.
int lifted_fourier_rank(int n, int d, const FrequencyGrid& grid, double tol = 1e-8);

}  // namespace qelift
