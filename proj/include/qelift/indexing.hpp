#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qelift/errors.hpp"

namespace qelift {

using MultiIndex = std::vector<int>;

// Bijection between multi-indices on the grid {0..n-1}^d and flat positions
// 0..n^d-1. Flat order is column-stacking generalized to d dimensions: the
// first coordinate varies fastest, so flat = j_0 + j_1*n + j_2*n^2 + ...
class IndexBijection {
public:
  IndexBijection(int n, int d);

  int n() const { return n_; }
  int d() const { return d_; }
  Eigen::Index size() const { return size_; }

  Eigen::Index flat(const MultiIndex& j) const;
  MultiIndex multi(Eigen::Index flat) const;

private:
  int n_;
  int d_;
  Eigen::Index size_;
};

// Dense complex array over {0..n-1}^d stored flat in IndexBijection order.
class ComplexTensor {
public:
  ComplexTensor(int n, int d);
  ComplexTensor(int n, int d, Eigen::VectorXcd data);

  int n() const { return map_.n(); }
  int d() const { return map_.d(); }
  Eigen::Index size() const { return map_.size(); }
  const IndexBijection& indexing() const { return map_; }

  std::complex<double>& at(const MultiIndex& j) { return data_(map_.flat(j)); }
  const std::complex<double>& at(const MultiIndex& j) const {
    return data_(map_.flat(j));
  }

  Eigen::VectorXcd& data() { return data_; }
  const Eigen::VectorXcd& data() const { return data_; }

private:
  IndexBijection map_;
  Eigen::VectorXcd data_;
};

// Copy of the tensor's entries in flat bijection order.
Eigen::VectorXcd vectorize(const ComplexTensor& x);

// Inverse of vectorize; v must have length n^d.
ComplexTensor tensorize(const Eigen::VectorXcd& v, int n, int d);

// All difference multi-indices {-n+1..n-1}^d, first coordinate fastest.
// Exactly (2n-1)^d elements.
std::vector<MultiIndex> difference_indices(int n, int d);

}  // namespace qelift
