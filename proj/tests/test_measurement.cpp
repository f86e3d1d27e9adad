#include <cmath>
#include <complex>

#include "doctest.h"
#include "qelift/measurement.hpp"
#include "qelift/rng.hpp"

using namespace qelift;

namespace {

Eigen::VectorXcd random_complex_vector(Rng& rng, Eigen::Index len) {
  Eigen::VectorXcd v(len);
  for (Eigen::Index i = 0; i < len; ++i) v(i) = rng.complex_normal();
  return v;
}

Eigen::MatrixXcd random_hermitian(Rng& rng, Eigen::Index n) {
  Eigen::MatrixXcd A(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = rng.complex_normal();
  return 0.5 * (A + A.adjoint());
}

MaskSet random_masks(Rng& rng, Eigen::Index N, int count) {
  MaskSet ms;
  for (int w = 0; w < count; ++w) {
    Eigen::VectorXd mask(N);
    bool any = false;
    for (Eigen::Index i = 0; i < N; ++i) {
      mask(i) = rng.bernoulli() ? 1.0 : 0.0;
      any = any || mask(i) == 1.0;
    }
    if (!any) mask(0) = 1.0;
    ms.masks.push_back(mask);
  }
  return ms;
}

}  // namespace

TEST_CASE("frequency grids expose counts and frequencies") {
  const FrequencyGrid g1 = FrequencyGrid::regular(4, 1);
  CHECK(g1.count() == 4);
  CHECK(g1.d() == 1);
  CHECK(g1.m() == 4);
  CHECK(g1.frequency(0)(0) == 0.0);
  CHECK(g1.frequency(1)(0) == doctest::Approx(-std::numbers::pi / 2).epsilon(1e-15));

  const FrequencyGrid g2 = FrequencyGrid::regular(3, 2);
  CHECK(g2.count() == 9);
  // Flat enumeration advances the first coordinate fastest.
  CHECK(g2.frequency(1)(0) == doctest::Approx(-2.0 * std::numbers::pi / 3).epsilon(1e-15));
  CHECK(g2.frequency(1)(1) == 0.0);
  CHECK(g2.frequency(3)(0) == 0.0);
  CHECK(g2.frequency(3)(1) == doctest::Approx(-2.0 * std::numbers::pi / 3).epsilon(1e-15));

  CHECK_THROWS_AS(g1.frequency(4), InputError);
  CHECK_THROWS_AS(FrequencyGrid::regular(0, 1), InputError);

  Eigen::MatrixXd zetas(2, 1);
  zetas << 0.5, -1.25;
  const FrequencyGrid ge = FrequencyGrid::explicit_list(zetas);
  CHECK(ge.count() == 2);
  CHECK(!ge.regular_mode());
  CHECK(ge.frequency(1)(0) == -1.25);
  CHECK_THROWS_AS(ge.m(), InputError);
  CHECK_THROWS_AS(FrequencyGrid::explicit_list(Eigen::MatrixXd(0, 1)), InputError);
}

TEST_CASE("mask sets are validated") {
  MaskSet ms;
  Eigen::VectorXd good(3);
  good << 1.0, 0.0, 1.0;
  ms.masks.push_back(good);
  CHECK_NOTHROW(ms.validate(3));
  CHECK_THROWS_AS(ms.validate(4), InputError);

  Eigen::VectorXd bad(3);
  bad << 1.0, 0.5, 0.0;
  MaskSet ms2;
  ms2.masks.push_back(bad);
  CHECK_THROWS_AS(ms2.validate(3), InputError);
}

TEST_CASE("measurement vector exposes blocks") {
  MeasurementVector b;
  b.block_size = 3;
  b.values = Eigen::VectorXcd::LinSpaced(6, 1.0, 6.0);
  CHECK(b.blocks() == 2);
  CHECK(b.block(1)(0) == std::complex<double>(4.0, 0.0));
}

TEST_CASE("grid atoms are roots of unity modulated by masks") {
  MaskSet ms;
  Eigen::VectorXd mask(4);
  mask << 1.0, 0.0, 1.0, 0.0;
  ms.masks.push_back(mask);
  const MeasurementOperator A(4, 1, FrequencyGrid::regular(4, 1), ms);
  CHECK(A.N() == 4);
  CHECK(A.block_count() == 2);
  CHECK(A.measurement_count() == 8);

  const Eigen::VectorXcd a = A.atom(0, 1);
  CHECK(std::abs(a(0) - std::complex<double>(1.0, 0.0)) <= 1e-15);
  CHECK(std::abs(a(1) - std::complex<double>(0.0, -1.0)) <= 1e-15);
  CHECK(std::abs(a(2) - std::complex<double>(-1.0, 0.0)) <= 1e-15);
  CHECK(std::abs(a(3) - std::complex<double>(0.0, 1.0)) <= 1e-15);

  const Eigen::VectorXcd am = A.atom(1, 1);
  CHECK(std::abs(am(0) - a(0)) <= 1e-15);
  CHECK(am(1) == std::complex<double>(0.0, 0.0));
  CHECK(std::abs(am(2) - a(2)) <= 1e-15);
  CHECK(am(3) == std::complex<double>(0.0, 0.0));
}

TEST_CASE("forward of a rank-one lift is the squared atom correlation") {
  Rng rng(22);
  const MeasurementOperator A(5, 1, FrequencyGrid::regular(7, 1), random_masks(rng, 5, 2));
  const Eigen::VectorXcd x = random_complex_vector(rng, 5);
  const MeasurementVector b = A.forward(x * x.adjoint());
  REQUIRE(b.values.size() == A.measurement_count());
  REQUIRE(b.block_size == 7);
  for (Eigen::Index blk = 0; blk < A.block_count(); ++blk) {
    for (Eigen::Index k = 0; k < 7; ++k) {
      const std::complex<double> corr = A.atom(blk, k).dot(x);
      const double want = std::norm(corr);
      CHECK(std::abs(b.block(blk)(k).real() - want) <= 1e-10 * std::max(1.0, want));
    }
  }
}

TEST_CASE("fft and naive paths agree") {
  Rng rng(33);
  for (int n : {3, 4}) {
    for (int d : {1, 2}) {
      const int m = n + 1 + int(rng.below(std::uint64_t(n)));
      Eigen::Index N = 1;
      for (int a = 0; a < d; ++a) N *= n;
      const MeasurementOperator A(n, d, FrequencyGrid::regular(m, d),
                                  random_masks(rng, N, 2));
      const Eigen::MatrixXcd X = random_hermitian(rng, N);
      const MeasurementVector f1 = A.forward_fft(X);
      const MeasurementVector f2 = A.forward_naive(X);
      const double fscale = std::max(1.0, f2.values.cwiseAbs().maxCoeff());
      CHECK((f1.values - f2.values).cwiseAbs().maxCoeff() <= 1e-10 * fscale);

      MeasurementVector b = f2;
      for (Eigen::Index i = 0; i < b.values.size(); ++i)
        b.values(i) += 0.1 * rng.normal();
      const Eigen::MatrixXcd g1 = A.gradient_fft(X, b);
      const Eigen::MatrixXcd g2 = A.gradient_naive(X, b);
      const double gscale = std::max(1.0, g2.norm());
      CHECK((g1 - g2).norm() <= 1e-10 * gscale);
    }
  }
}

TEST_CASE("fft paths reject explicit frequency lists") {
  Eigen::MatrixXd zetas(3, 1);
  zetas << 0.3, 1.1, -2.0;
  const MeasurementOperator A(3, 1, FrequencyGrid::explicit_list(zetas), MaskSet::none());
  const Eigen::MatrixXcd X = Eigen::MatrixXcd::Identity(3, 3);
  CHECK_THROWS_AS(A.forward_fft(X), InputError);
  const MeasurementVector b = A.forward(X);
  CHECK_THROWS_AS(A.gradient_fft(X, b), InputError);
  CHECK_NOTHROW(A.gradient(X, b));
}

TEST_CASE("gradient is exactly hermitian and checks dimensions") {
  Rng rng(44);
  const MeasurementOperator A(4, 1, FrequencyGrid::regular(6, 1), random_masks(rng, 4, 3));
  const Eigen::MatrixXcd X = random_hermitian(rng, 4);
  MeasurementVector b = A.forward(X);
  for (Eigen::Index i = 0; i < b.values.size(); ++i) b.values(i) += rng.normal();
  const Eigen::MatrixXcd G = A.gradient(X, b);
  CHECK((G - G.adjoint()).norm() == 0.0);

  MeasurementVector wrong;
  wrong.block_size = 3;
  wrong.values = Eigen::VectorXcd::Zero(6);
  CHECK_THROWS_AS(A.gradient(X, wrong), InputError);
}

TEST_CASE("gradient_with_objective reports the data fit") {
  Rng rng(55);
  const MeasurementOperator A(4, 1, FrequencyGrid::regular(5, 1), random_masks(rng, 4, 1));
  const Eigen::MatrixXcd X = random_hermitian(rng, 4);
  MeasurementVector b = A.forward(X);
  for (Eigen::Index i = 0; i < b.values.size(); ++i) b.values(i) += 0.3 * rng.normal();
  double obj = -1.0;
  const Eigen::MatrixXcd G = A.gradient_with_objective(X, b, &obj);
  const double want = 0.5 * (A.forward(X).values - b.values).squaredNorm();
  CHECK(obj == doctest::Approx(want).epsilon(1e-12));
  CHECK((G - A.gradient(X, b)).norm() == 0.0);
}

TEST_CASE("psd lifts produce real measurements") {
  Rng rng(66);
  const MeasurementOperator A(5, 1, FrequencyGrid::regular(5, 1), random_masks(rng, 5, 2));
  Eigen::MatrixXcd V(5, 2);
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) V(i, j) = rng.complex_normal();
  const MeasurementVector b = A.forward(V * V.adjoint());
  const double scale = b.values.cwiseAbs().maxCoeff();
  CHECK(b.values.imag().cwiseAbs().maxCoeff() <= 1e-12 * scale);
  CHECK(b.values.real().minCoeff() >= -1e-12 * scale);
}

TEST_CASE("dense matrixification multiplies like the operator") {
  Rng rng(77);
  const MeasurementOperator A(3, 1, FrequencyGrid::regular(4, 1), random_masks(rng, 3, 2));
  const Eigen::MatrixXcd D = A.dense_matrix();
  REQUIRE(D.rows() == A.measurement_count());
  REQUIRE(D.cols() == 9);
  const Eigen::MatrixXcd X = random_hermitian(rng, 3);
  const Eigen::Map<const Eigen::VectorXcd> vecX(X.data(), 9);
  const Eigen::VectorXcd via_dense = D * vecX;
  const Eigen::VectorXcd via_forward = A.forward(X).values;
  CHECK((via_dense - via_forward).cwiseAbs().maxCoeff() <=
        1e-10 * std::max(1.0, via_forward.cwiseAbs().maxCoeff()));
}

TEST_CASE("dense matrixification refuses oversized operators") {
  const MeasurementOperator big(15, 2, FrequencyGrid::regular(15, 2), MaskSet::none());
  CHECK_THROWS_AS(big.dense_matrix(), CapacityError);
}

TEST_CASE("operator norm equals N on the plain transform") {
  const MeasurementOperator A1(4, 1, FrequencyGrid::regular(4, 1), MaskSet::none());
  CHECK(std::abs(A1.operator_norm() - 4.0) <= 1e-8 * 4.0);
  const MeasurementOperator A2(3, 2, FrequencyGrid::regular(3, 2), MaskSet::none());
  CHECK(std::abs(A2.operator_norm() - 9.0) <= 1e-8 * 9.0);
}

TEST_CASE("norm bounds bracket the masked operator norm") {
  Rng rng(88);
  const MeasurementOperator A(6, 1, FrequencyGrid::regular(6, 1), random_masks(rng, 6, 2));
  const auto [lo, hi] = A.norm_bounds();
  CHECK(lo == 6.0);
  CHECK(hi == 18.0);
  const double nrm = A.operator_norm();
  CHECK(nrm >= lo * (1.0 - 1e-8));
  CHECK(nrm <= hi * (1.0 + 1e-8));

  const MeasurementOperator off(4, 1, FrequencyGrid::regular(7, 1), MaskSet::none());
  CHECK_THROWS_AS(off.norm_bounds(), InputError);
}

TEST_CASE("lifted rank follows the oversampling law") {
  CHECK(lifted_fourier_rank(2, 1, FrequencyGrid::regular(2, 1)) == 2);
  CHECK(lifted_fourier_rank(2, 1, FrequencyGrid::regular(3, 1)) == 3);
  CHECK(lifted_fourier_rank(2, 1, FrequencyGrid::regular(4, 1)) == 3);
  CHECK(lifted_fourier_rank(3, 2, FrequencyGrid::regular(3, 2)) == 9);
  CHECK(lifted_fourier_rank(3, 2, FrequencyGrid::regular(5, 2)) == 25);
  CHECK(lifted_fourier_rank(3, 2, FrequencyGrid::regular(6, 2)) == 25);
}

TEST_CASE("explicit frequency sets respect the rank bound") {
  Rng rng(99);
  Eigen::MatrixXd zetas(7, 2);
  for (Eigen::Index i = 0; i < 7; ++i)
    for (Eigen::Index j = 0; j < 2; ++j)
      zetas(i, j) = (2.0 * rng.uniform() - 1.0) * std::numbers::pi;
  const int r = lifted_fourier_rank(3, 2, FrequencyGrid::explicit_list(zetas));
  CHECK(r == 7);

  Eigen::MatrixXd dup(4, 1);
  dup << 0.5, 1.25, -2.0, 0.5;
  CHECK(lifted_fourier_rank(3, 1, FrequencyGrid::explicit_list(dup)) == 3);
}
