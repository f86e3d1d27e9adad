#include "qelift/indexing.hpp"

#include <string>

namespace qelift {

namespace {

Eigen::Index checked_size(int n, int d) {
  if (n < 1) throw DimensionError("grid side must be >= 1, got " + std::to_string(n));
  if (d < 1) throw DimensionError("dimension must be >= 1, got " + std::to_string(d));
  Eigen::Index size = 1;
  for (int a = 0; a < d; ++a) {
    if (size > (Eigen::Index(1) << 40) / n)
      throw CapacityError("grid n^d too large: n=" + std::to_string(n) +
                          " d=" + std::to_string(d));
    size *= n;
  }
  return size;
}

}  // namespace

IndexBijection::IndexBijection(int n, int d) : n_(n), d_(d), size_(checked_size(n, d)) {}

Eigen::Index IndexBijection::flat(const MultiIndex& j) const {
  if (static_cast<int>(j.size()) != d_)
    throw DimensionError("multi-index has " + std::to_string(j.size()) +
                         " coordinates, expected " + std::to_string(d_));
  Eigen::Index f = 0;
  Eigen::Index stride = 1;
  for (int a = 0; a < d_; ++a) {
    if (j[a] < 0 || j[a] >= n_)
      throw DimensionError("coordinate " + std::to_string(j[a]) +
                           " outside grid side " + std::to_string(n_));
    f += stride * j[a];
    stride *= n_;
  }
  return f;
}

MultiIndex IndexBijection::multi(Eigen::Index flat) const {
  if (flat < 0 || flat >= size_)
    throw DimensionError("flat index " + std::to_string(flat) + " outside 0.." +
                         std::to_string(size_ - 1));
  MultiIndex j(d_);
  for (int a = 0; a < d_; ++a) {
    j[a] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return j;
}

ComplexTensor::ComplexTensor(int n, int d)
    : map_(n, d), data_(Eigen::VectorXcd::Zero(map_.size())) {}

ComplexTensor::ComplexTensor(int n, int d, Eigen::VectorXcd data)
    : map_(n, d), data_(std::move(data)) {
  if (data_.size() != map_.size())
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match n^d = " + std::to_string(map_.size()));
}

Eigen::VectorXcd vectorize(const ComplexTensor& x) { return x.data(); }

ComplexTensor tensorize(const Eigen::VectorXcd& v, int n, int d) {
  return ComplexTensor(n, d, v);
}

std::vector<MultiIndex> difference_indices(int n, int d) {
  IndexBijection check(n, d);  // validates n, d
  (void)check;
  const int side = 2 * n - 1;
  Eigen::Index count = 1;
  for (int a = 0; a < d; ++a) count *= side;
  std::vector<MultiIndex> out;
  out.reserve(count);
  MultiIndex p(d, -(n - 1));
  for (Eigen::Index i = 0; i < count; ++i) {
    out.push_back(p);
    for (int a = 0; a < d; ++a) {
      if (++p[a] <= n - 1) break;
      p[a] = -(n - 1);
    }
  }
  return out;
}

}  // namespace qelift
