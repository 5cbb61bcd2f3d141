#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "magnus/error.hpp"
#include "magnus/linalg.hpp"

using namespace magnus;

namespace {

ComplexMatrix random_complex(std::mt19937& rng, int dim, double scale) {
  std::normal_distribution<double> g;
  ComplexMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m * (scale / spectral_norm(m));
}

RealMatrix random_real(std::mt19937& rng, int dim, double scale) {
  std::normal_distribution<double> g;
  RealMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = g(rng);
  return m * (scale / spectral_norm(m));
}

double eig_residual(const ComplexMatrix& m) {
  Spectrum s = eig(m);
  auto vecs = eigenvectors(m, s.eigenvalues);
  double worst = 0;
  for (std::size_t k = 0; k < vecs.size(); ++k)
    worst = std::max(worst, (m * vecs[k] - s.eigenvalues[k] * vecs[k]).norm() / std::max(1.0, spectral_norm(m)));
  return worst;
}

}  // namespace

TEST_CASE("negative axis band") {
  CHECK(on_negative_axis(Complex(-1, 0)));
  CHECK(on_negative_axis(Complex(0, 0)));
  CHECK(on_negative_axis(Complex(-2, 1e-10)));
  CHECK_FALSE(on_negative_axis(Complex(-2, 1e-6)));
  CHECK_FALSE(on_negative_axis(Complex(1, 0)));
}

TEST_CASE("expm agrees with an independent implementation") {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    int dim = 1 + trial % 6;
    double scale = 0.1 + trial * 0.5;
    ComplexMatrix m = random_complex(rng, dim, scale);
    ComplexMatrix ref = m.exp();
    CHECK((expm(m) - ref).norm() / ref.norm() < 1e-12);
  }
  ComplexMatrix z = ComplexMatrix::Zero(3, 3);
  CHECK((expm(z) - ComplexMatrix::Identity(3, 3)).norm() < 1e-15);
  ComplexMatrix rot(2, 2);
  rot << 0, M_PI, -M_PI, 0;
  ComplexMatrix minus = expm(rot);
  CHECK((minus + ComplexMatrix::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("logm_integral inverts expm off the branch cut") {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    int dim = 1 + trial % 5;
    ComplexMatrix m = random_complex(rng, dim, 1.0);
    ComplexMatrix back = logm_integral(expm(m));
    CHECK((back - m).norm() < 1e-9);
  }
}

TEST_CASE("logm_integral and logm_eig agree with an independent logarithm") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    ComplexMatrix p = ComplexMatrix::Identity(4, 4) + random_complex(rng, 4, 0.6);
    ComplexMatrix ref = p.log();
    CHECK((logm_integral(p) - ref).norm() < 1e-9);
    CHECK((logm_eig(p) - ref).norm() < 1e-7);
  }
}

TEST_CASE("logarithms refuse the negative axis") {
  ComplexMatrix y(2, 2);
  y << -1, 0, M_PI, -1;
  CHECK_THROWS_AS(logm_integral(y), NegativeSpectrum);
  ComplexMatrix d = ComplexMatrix::Identity(2, 2);
  d(1, 1) = -0.5;
  CHECK_THROWS_AS(logm_eig(d), NegativeSpectrum);
  ComplexMatrix jordan(2, 2);
  jordan << 2, 1, 0, 2;
  CHECK_THROWS_AS(logm_eig(jordan), IllConditioned);
  CHECK((logm_integral(jordan) - jordan.log()).norm() < 1e-10);
}

TEST_CASE("eigenvalues: residuals and conjugate closure") {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    int dim = 1 + trial % 8;
    RealMatrix m = random_real(rng, dim, 1 + trial % 4);
    CHECK(eig_residual(to_complex(m)) < 1e-9);
    std::vector<Complex> ev = eig(m).eigenvalues;
    REQUIRE(ev.size() == static_cast<std::size_t>(dim));
    for (Complex z : ev) {
      bool found = std::any_of(ev.begin(), ev.end(), [&](Complex w) { return w == std::conj(z); });
      CHECK(found);
    }
    Complex trace = 0;
    for (Complex z : ev) trace += z;
    CHECK(std::abs(trace - m.trace()) < 1e-10 * (1 + m.norm()));
  }
  for (int trial = 0; trial < 20; ++trial) {
    ComplexMatrix m = random_complex(rng, 2 + trial % 10, 2.0);
    CHECK(eig_residual(m) < 1e-9);
  }
}

TEST_CASE("eigenvalues of structured matrices") {
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d.diagonal() << 3.0, -1.0, Complex(0, 2);
  auto ev = eigenvalues(d);
  std::sort(ev.begin(), ev.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
  CHECK(std::abs(ev[0] - Complex(-1, 0)) < 1e-14);
  CHECK(std::abs(ev[1] - Complex(0, 2)) < 1e-14);
  CHECK(std::abs(ev[2] - Complex(3, 0)) < 1e-14);

  RealMatrix rot(2, 2);
  rot << 0, 1, -1, 0;
  auto r = eig(rot).eigenvalues;
  CHECK(std::abs(std::abs(r[0].imag()) - 1) < 1e-14);
  CHECK(r[0] == std::conj(r[1]));

  CHECK(eig(d).condition_estimate == doctest::Approx(1.0));
  ComplexMatrix jordan(2, 2);
  jordan << 1, 1, 0, 1;
  CHECK(eig(jordan).condition_estimate > 1e6);
  CHECK_THROWS_AS(eig(ComplexMatrix(2, 3)), DimensionMismatch);
}

TEST_CASE("norms, rank and geometric multiplicity") {
  RealMatrix m(2, 2);
  m << 3, 0, 4, 5;
  CHECK(spectral_norm(m) == doctest::Approx(std::sqrt(45.0)));
  CHECK(spectral_norm(to_complex(m)) == doctest::Approx(std::sqrt(45.0)));

  ComplexMatrix r = ComplexMatrix::Zero(3, 3);
  r(0, 0) = 1;
  r(1, 2) = 1e-3;
  CHECK(numerical_rank(r, 1e-6) == 2);
  CHECK(numerical_rank(r, 1e-2) == 1);

  ComplexMatrix jordan(2, 2);
  jordan << -1, 0, M_PI, -1;
  CHECK(geometric_multiplicity(jordan, -1.0, 1e-6) == 1);
  ComplexMatrix minus = -ComplexMatrix::Identity(2, 2);
  CHECK(geometric_multiplicity(minus, -1.0, 1e-6) == 2);
}
