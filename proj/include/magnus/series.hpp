#pragma once

// Magnus series terms of Y' = A(t) Y, generated exactly for
// piecewise-polynomial A(t).

#include <complex>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "magnus/linalg.hpp"
#include "magnus/polymat.hpp"

namespace magnus {

/// Bernoulli number B_k with the convention B_1 = -1/2.
Rational bernoulli(int k);

/// Terms Omega_1 .. Omega_N of the Magnus series of `source`, stored per
/// order (never summed) so each term can be inspected on its own.
class MagnusSeries {
 public:
  MagnusSeries(PiecewisePolyMatrix source, std::vector<PiecewisePolyMatrix> terms);

  const PiecewisePolyMatrix& source() const noexcept { return source_; }
  const std::vector<PiecewisePolyMatrix>& terms() const noexcept { return terms_; }
  /// 1-based: term(1) is Omega_1.
  const PiecewisePolyMatrix& term(int n) const;
  int order() const noexcept { return static_cast<int>(terms_.size()); }
  std::size_t dim() const noexcept { return source_.dim(); }

  /// Omega_n(t) in floating point.
  RealMatrix term_value(int n, double t) const;

 private:
  PiecewisePolyMatrix source_;
  std::vector<PiecewisePolyMatrix> terms_;
  std::shared_ptr<const std::vector<DenseEvaluator>> evaluators_;
};

/// Exact terms 1..order by the commutator recursion
///   S_n^(1) = [Omega_{n-1}, A],  S_n^(j) = sum_{m=1}^{n-j} [Omega_m, S_{n-m}^(j-1)],
///   Omega_1 = int A,  Omega_n = sum_{j=1}^{n-1} B_j/j! int S_n^(j).
MagnusSeries magnus_terms(const PiecewisePolyMatrix& a, int order);

/// Omega_n (n <= 4) straight from the iterated-integral formulas, computed by
/// expanding every nested commutator into monomials. Independent of
/// magnus_terms; requires a single segment starting at t = 0.
PiecewisePolyMatrix magnus_terms_oracle(const PiecewisePolyMatrix& a, int n);

/// sum_{k<=n} Omega_k(t).
RealMatrix partial_sum(const MagnusSeries& s, int n, double t);

/// sum_{k<=n} kappa^k Omega_k(t), the series for A -> kappa A.
ComplexMatrix kappa_scaled(const MagnusSeries& s, std::complex<double> kappa, int n, double t);

/// || Omega'(t) - sum_{k=0}^{K} B_k/k! ad_Omega^k (A(t)) ||_2 with Omega the
/// full partial sum of s.
double dexpinv_residual(const MagnusSeries& s, double t, int K = 16);

/// Two-segment generator: A2 on [0,1), A1 on [1,2]; its solution at t = 2
/// is exp(A1) exp(A2).
PiecewisePolyMatrix bch_generator(std::size_t dim, const std::vector<Rational>& a1, const std::vector<Rational>& a2);

/// Magnus series of bch_generator; term n evaluated at t = 2 is the
/// order-n Baker-Campbell-Hausdorff term of log(exp(A1) exp(A2)).
MagnusSeries bch_terms(std::size_t dim, const std::vector<Rational>& a1, const std::vector<Rational>& a2,
                       int order);

/// Serialized series: a "source" block followed by one "term n" block per
/// order, each in the model format.
std::string format_series(const MagnusSeries& s);
MagnusSeries parse_series(std::string_view text);

}  // namespace magnus
