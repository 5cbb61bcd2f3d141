#pragma once

// Dense kernels for small (dim <= 16) real and complex matrices.

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace magnus {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr Eigen::Index kMaxDim = 16;

/// Band used to decide that an eigenvalue sits on the closed negative real
/// axis: |Im z| <= tol (1 + |z|) and Re z <= tol.
inline constexpr double kCutTolerance = 1e-9;
bool on_negative_axis(Complex z, double tol = kCutTolerance);

struct Spectrum {
  std::vector<Complex> eigenvalues;
  /// 2-norm condition number of the unit-column eigenvector matrix built by
  /// inverse iteration; infinite when the eigenbasis is numerically singular.
  double condition_estimate = 0.0;
};

inline ComplexMatrix to_complex(const RealMatrix& m) { return m.cast<Complex>(); }

/// Scaling and squaring with a degree-13 Pade core.
ComplexMatrix expm(const ComplexMatrix& m);

/// Principal logarithm via the resolvent integral
///   log P = (P - I) int_0^inf (1+mu)^-1 (mu I + P)^-1 dmu,
/// evaluated after mu = s/(1-s) as (P - I) int_0^1 (s I + (1-s) P)^-1 ds
/// with adaptive composite Gauss-Legendre panels.
/// Throws NegativeSpectrum if any eigenvalue lies on (-inf, 0].
ComplexMatrix logm_integral(const ComplexMatrix& phi, double tol = 1e-12);

/// V diag(log lambda) V^-1 with principal scalar logs.
/// Throws IllConditioned when the eigenbasis condition exceeds max_condition,
/// NegativeSpectrum on a cut eigenvalue.
ComplexMatrix logm_eig(const ComplexMatrix& phi, double max_condition = 1e8);

/// Hessenberg reduction followed by shifted QR iteration. Real input
/// matrices give an exactly conjugate-closed spectrum.
Spectrum eig(const ComplexMatrix& m);
Spectrum eig(const RealMatrix& m);

/// Eigenvalues only (no eigenvector/condition work).
std::vector<Complex> eigenvalues(const ComplexMatrix& m);

/// Unit eigenvector for each value by inverse iteration.
std::vector<ComplexVector> eigenvectors(const ComplexMatrix& m, const std::vector<Complex>& values);

double spectral_norm(const ComplexMatrix& m);
double spectral_norm(const RealMatrix& m);

/// Number of pivots above `threshold` in complete-pivoting elimination.
int numerical_rank(const ComplexMatrix& m, double threshold);

/// dim - rank(M - lambda I) with rank threshold tol * ||M||_2.
int geometric_multiplicity(const ComplexMatrix& m, Complex lambda, double tol);

}  // namespace magnus
