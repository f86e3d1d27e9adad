#include "qelift/measurement.hpp"

#include <fftw3.h>

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>

#include "qelift/rng.hpp"

namespace qelift {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// RAII scratch buffer with FFTW's alignment, so plans created on one buffer
// can be executed on another (new-array execute requires equal alignment).
struct FftwBuffer {
  explicit FftwBuffer(std::size_t size)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size))) {
    if (data == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  std::complex<double>* complex_ptr() { return reinterpret_cast<std::complex<double>*>(data); }
  fftw_complex* data;
};

}  // namespace

struct MeasurementOperator::FftPlans {
  FftPlans(int m, int d) : size(1) {
    for (int a = 0; a < d; ++a) size *= m;
    std::vector<int> dims(d, m);
    FftwBuffer scratch(size);
    forward = fftw_plan_dft(d, dims.data(), scratch.data, scratch.data,
                            FFTW_FORWARD, FFTW_ESTIMATE);
    backward = fftw_plan_dft(d, dims.data(), scratch.data, scratch.data,
                             FFTW_BACKWARD, FFTW_ESTIMATE);
    if (forward == nullptr || backward == nullptr)
      throw NumericalError("FFTW plan creation failed");
  }
  ~FftPlans() {
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }

  // Out-of-place execution on per-call buffers; the plans are read-only
  // here, which keeps const evaluations safe to run concurrently.
  void run(fftw_plan plan, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
    FftwBuffer buf(size);
    std::copy_n(in.data(), size, buf.complex_ptr());
    fftw_execute_dft(plan, buf.data, buf.data);
    out.resize(static_cast<Eigen::Index>(size));
    std::copy_n(buf.complex_ptr(), size, out.data());
  }

  std::size_t size;
  fftw_plan forward;
  fftw_plan backward;
};

FrequencyGrid FrequencyGrid::regular(int m, int d) {
  if (m < 1) throw InputError("frequency grid needs m >= 1");
  if (d < 1) throw InputError("frequency grid needs d >= 1");
  FrequencyGrid g;
  g.regular_ = true;
  g.m_ = m;
  g.d_ = d;
  return g;
}

FrequencyGrid FrequencyGrid::explicit_list(Eigen::MatrixXd zetas) {
  if (zetas.rows() < 1) throw InputError("explicit frequency list is empty");
  if (zetas.cols() < 1) throw InputError("explicit frequency list needs d >= 1 columns");
  if (!zetas.allFinite()) throw InputError("explicit frequency list contains non-finite values");
  FrequencyGrid g;
  g.regular_ = false;
  g.d_ = static_cast<int>(zetas.cols());
  g.zetas_ = std::move(zetas);
  return g;
}

int FrequencyGrid::m() const {
  if (!regular_) throw InputError("explicit frequency lists have no grid size m");
  return m_;
}

Eigen::Index FrequencyGrid::count() const {
  if (!regular_) return zetas_.rows();
  Eigen::Index c = 1;
  for (int a = 0; a < d_; ++a) c *= m_;
  return c;
}

Eigen::VectorXd FrequencyGrid::frequency(Eigen::Index k) const {
  if (k < 0 || k >= count()) throw InputError("frequency index out of range");
  if (!regular_) return zetas_.row(k);
  Eigen::VectorXd zeta(d_);
  for (int a = 0; a < d_; ++a) {
    zeta(a) = -kTwoPi * double(k % m_) / double(m_);
    k /= m_;
  }
  return zeta;
}

void MaskSet::validate(Eigen::Index N) const {
  for (const auto& w : masks) {
    if (w.size() != N)
      throw DimensionError("mask length " + std::to_string(w.size()) +
                           " does not match N = " + std::to_string(N));
    for (Eigen::Index i = 0; i < N; ++i)
      if (w(i) != 0.0 && w(i) != 1.0)
        throw InputError("mask entries must be 0 or 1");
  }
}

MeasurementOperator::MeasurementOperator(int n, int d, FrequencyGrid grid, MaskSet masks)
    : n_(n), d_(d), grid_(std::move(grid)), masks_(std::move(masks)) {
  IndexBijection map(n, d);
  N_ = map.size();
  if (grid_.d() != d)
    throw DimensionError("frequency grid dimension " + std::to_string(grid_.d()) +
                         " does not match operator dimension " + std::to_string(d));
  if (grid_.regular_mode() && grid_.m() < n)
    throw InputError("measurement grid m = " + std::to_string(grid_.m()) +
                     " must be at least the object grid n = " + std::to_string(n));
  masks_.validate(N_);

  digits_.resize(N_, d_);
  for (Eigen::Index f = 0; f < N_; ++f) {
    const MultiIndex j = map.multi(f);
    for (int a = 0; a < d_; ++a) digits_(f, a) = j[a];
  }

  supports_.resize(block_count());
  for (Eigen::Index b = 0; b < block_count(); ++b) {
    auto& sup = supports_[b];
    if (b == 0) {
      sup.resize(N_);
      std::iota(sup.begin(), sup.end(), Eigen::Index(0));
    } else {
      const Eigen::VectorXd& w = masks_.masks[b - 1];
      for (Eigen::Index i = 0; i < N_; ++i)
        if (w(i) == 1.0) sup.push_back(i);
    }
  }

  if (grid_.regular_mode()) {
    const int m = grid_.m();
    fold_stride_.resize(d_);
    Eigen::Index stride = 1;
    for (int a = 0; a < d_; ++a) {
      fold_stride_[a] = stride;
      stride *= m;
    }
    fft_ = std::make_unique<FftPlans>(m, d_);
  }
}

MeasurementOperator::~MeasurementOperator() = default;
MeasurementOperator::MeasurementOperator(MeasurementOperator&&) noexcept = default;
MeasurementOperator& MeasurementOperator::operator=(MeasurementOperator&&) noexcept = default;

Eigen::VectorXcd MeasurementOperator::atom(Eigen::Index block, Eigen::Index k) const {
  if (block < 0 || block >= block_count()) throw InputError("mask block out of range");
  const Eigen::VectorXd zeta = grid_.frequency(k);
  Eigen::VectorXcd a(N_);
  for (Eigen::Index j = 0; j < N_; ++j) {
    double phase = 0.0;
    for (int ax = 0; ax < d_; ++ax) phase += zeta(ax) * double(digits_(j, ax));
    a(j) = std::polar(1.0, phase);
  }
  if (block > 0) {
    const Eigen::VectorXd& w = masks_.masks[block - 1];
    for (Eigen::Index j = 0; j < N_; ++j) a(j) *= w(j);
  }
  return a;
}

MeasurementVector MeasurementOperator::empty_measurement() const {
  MeasurementVector v;
  v.block_size = grid_.count();
  v.values = Eigen::VectorXcd::Zero(measurement_count());
  return v;
}

void MeasurementOperator::check_measurement(const MeasurementVector& b) const {
  if (b.block_size != grid_.count() || b.values.size() != measurement_count())
    throw DimensionError("measurement vector layout does not match the operator");
}

Eigen::Index MeasurementOperator::fold_cell(Eigen::Index j, Eigen::Index l) const {
  const int m = grid_.m();
  Eigen::Index cell = 0;
  for (int ax = 0; ax < d_; ++ax) {
    int delta = digits_(l, ax) - digits_(j, ax);
    if (delta < 0) delta += m;
    cell += fold_stride_[ax] * delta;
  }
  return cell;
}

MeasurementVector MeasurementOperator::forward_fft(const Eigen::MatrixXcd& X) const {
  if (!grid_.regular_mode())
    throw InputError("FFT path requires a regular frequency grid; use the naive path");
  if (X.rows() != N_ || X.cols() != N_)
    throw DimensionError("lifted matrix must be N x N with N = " + std::to_string(N_));

  MeasurementVector out = empty_measurement();
  Eigen::VectorXcd ymod(grid_.count()), spectrum;

  for (Eigen::Index b = 0; b < block_count(); ++b) {
    const auto& sup = supports_[b];
    ymod.setZero();
    // Diagonal sums over index differences, folded modulo m on the fly:
    // every support pair (j, l) contributes X(j, l) to cell (l - j) mod m.
    for (Eigen::Index l : sup)
      for (Eigen::Index j : sup) ymod(fold_cell(j, l)) += X(j, l);
    fft_->run(fft_->forward, ymod, spectrum);
    out.block(b) = spectrum.conjugate();
  }
  return out;
}

MeasurementVector MeasurementOperator::forward_naive(const Eigen::MatrixXcd& X) const {
  if (X.rows() != N_ || X.cols() != N_)
    throw DimensionError("lifted matrix must be N x N with N = " + std::to_string(N_));
  MeasurementVector out = empty_measurement();
  const Eigen::Index S = grid_.count();
  for (Eigen::Index b = 0; b < block_count(); ++b) {
    for (Eigen::Index k = 0; k < S; ++k) {
      const Eigen::VectorXcd a = atom(b, k);
      out.values(b * S + k) = a.dot(X * a);
    }
  }
  return out;
}

MeasurementVector MeasurementOperator::forward(const Eigen::MatrixXcd& X) const {
  return grid_.regular_mode() ? forward_fft(X) : forward_naive(X);
}

Eigen::MatrixXcd MeasurementOperator::assemble_gradient_fft(const MeasurementVector& c,
                                                            const MeasurementVector& b) const {
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(N_, N_);
  Eigen::VectorXcd residual(grid_.count()), filled;
  for (Eigen::Index blk = 0; blk < block_count(); ++blk) {
    residual = c.block(blk) - b.block(blk);
    // Adjoint of the fold/diagonal-sum reduction: entry (j, l) of the
    // per-block gradient is the residual's inverse transform at (l - j),
    // and masked rows/columns stay zero because the loops walk the support.
    fft_->run(fft_->backward, residual, filled);
    const auto& sup = supports_[blk];
    for (Eigen::Index l : sup)
      for (Eigen::Index j : sup) G(j, l) += filled(fold_cell(j, l));
  }
  return 0.5 * (G + G.adjoint()).eval();
}

Eigen::MatrixXcd MeasurementOperator::assemble_gradient_naive(const MeasurementVector& c,
                                                              const MeasurementVector& b) const {
  const Eigen::Index S = grid_.count();
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(N_, N_);
  for (Eigen::Index blk = 0; blk < block_count(); ++blk) {
    for (Eigen::Index k = 0; k < S; ++k) {
      const Eigen::VectorXcd a = atom(blk, k);
      const std::complex<double> r = c.values(blk * S + k) - b.values(blk * S + k);
      G.noalias() += r * (a * a.adjoint());
    }
  }
  return 0.5 * (G + G.adjoint()).eval();
}

Eigen::MatrixXcd MeasurementOperator::gradient_fft(const Eigen::MatrixXcd& X,
                                                   const MeasurementVector& b) const {
  check_measurement(b);
  return assemble_gradient_fft(forward_fft(X), b);
}

Eigen::MatrixXcd MeasurementOperator::gradient_naive(const Eigen::MatrixXcd& X,
                                                     const MeasurementVector& b) const {
  check_measurement(b);
  return assemble_gradient_naive(forward_naive(X), b);
}

Eigen::MatrixXcd MeasurementOperator::gradient(const Eigen::MatrixXcd& X,
                                               const MeasurementVector& b) const {
  return grid_.regular_mode() ? gradient_fft(X, b) : gradient_naive(X, b);
}

Eigen::MatrixXcd MeasurementOperator::gradient_with_objective(const Eigen::MatrixXcd& X,
                                                              const MeasurementVector& b,
                                                              double* objective) const {
  check_measurement(b);
  const MeasurementVector c = forward(X);
  if (objective != nullptr) *objective = 0.5 * (c.values - b.values).squaredNorm();
  return grid_.regular_mode() ? assemble_gradient_fft(c, b) : assemble_gradient_naive(c, b);
}

std::pair<double, double> MeasurementOperator::norm_bounds() const {
  if (!grid_.regular_mode() || grid_.m() != n_)
    throw ParameterError("norm bounds are certified only for regular grids with m = n");
  return {double(N_), double(measurement_count())};
}

double MeasurementOperator::operator_norm(int max_iterations, double rel_tol) const {
  // Power iteration on the PSD map X -> A*(A X), seeded deterministically.
  Rng rng(0x9e1fULL);
  Eigen::MatrixXcd X(N_, N_);
  for (Eigen::Index j = 0; j < N_; ++j)
    for (Eigen::Index i = 0; i < N_; ++i) X(i, j) = rng.complex_normal();
  X = 0.5 * (X + X.adjoint()).eval();
  X /= X.norm();

  const MeasurementVector zero = empty_measurement();
  double rayleigh = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::MatrixXcd Y = gradient(X, zero);
    const double next = (X.conjugate().cwiseProduct(Y)).sum().real();
    const double norm = Y.norm();
    if (norm == 0.0) return 0.0;
    X = Y / norm;
    const bool settled = it > 0 && std::abs(next - rayleigh) <= rel_tol * std::abs(next);
    rayleigh = next;
    if (settled) break;
  }
  return std::sqrt(std::max(rayleigh, 0.0));
}

Eigen::MatrixXcd MeasurementOperator::dense_matrix() const {
  const Eigen::Index entries = measurement_count() * N_ * N_;
  if (entries > 10'000'000)
    throw CapacityError("dense matrixification needs " + std::to_string(entries) +
                        " entries, above the 1e7 guard");
  const Eigen::Index S = grid_.count();
  Eigen::MatrixXcd dense(measurement_count(), N_ * N_);
  for (Eigen::Index blk = 0; blk < block_count(); ++blk) {
    for (Eigen::Index k = 0; k < S; ++k) {
      const Eigen::VectorXcd a = atom(blk, k);
      for (Eigen::Index j = 0; j < N_; ++j)
        for (Eigen::Index i = 0; i < N_; ++i)
          dense(blk * S + k, i + j * N_) = std::conj(a(i)) * a(j);
    }
  }
  return dense;
}

int lifted_fourier_rank(int n, int d, const FrequencyGrid& grid, double tol) {
  if (!(tol > 0.0)) throw ParameterError("rank tolerance must be positive");
  MeasurementOperator op(n, d, grid, MaskSet::none());
  const Eigen::MatrixXcd dense = op.dense_matrix();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(dense);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  return static_cast<int>((sv.array() > tol * sv(0)).count());
}

}  // namespace qelift
