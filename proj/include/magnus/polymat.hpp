#pragma once

// Exact piecewise-polynomial matrix functions of time.
//
// Every Magnus term of a polynomial A(t) is again a polynomial matrix with
// rational coefficients, so all algebra here is exact. Entries of a
// PolyMatrix share one positive denominator; the pair (numerators,
// denominator) is reduced to lowest terms after every operation.

#include <gmpxx.h>

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

namespace magnus {

using Integer = mpz_class;
using Rational = mpq_class;
using RealMatrix = Eigen::MatrixXd;

/// Largest entry degree any polymat operation may produce (default 512).
int max_degree();
void set_max_degree(int degree);

/// Parses "3", "-1/4", "0.5" (decimal literals are converted exactly).
Rational parse_rational(const std::string& text);
/// Canonical form: "3", "-1/4".
std::string format_rational(const Rational& value);

/// Univariate polynomial with exact rational coefficients; index i holds the
/// coefficient of t^i. The zero polynomial has no coefficients.
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<Rational> coefficients);

  static Poly constant(const Rational& value);
  static Poly monomial(const Rational& coefficient, int power);

  const std::vector<Rational>& coefficients() const noexcept { return coeffs_; }
  /// -1 for the zero polynomial.
  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const noexcept { return coeffs_.empty(); }
  Rational coefficient(std::size_t power) const;

  double evaluate(double t) const;
  Rational evaluate(const Rational& t) const;
  Poly derivative() const;
  /// Antiderivative with zero constant term.
  Poly antiderivative() const;

  friend bool operator==(const Poly&, const Poly&) = default;

 private:
  std::vector<Rational> coeffs_;
};

Poly poly_add(const Poly& p, const Poly& q);
Poly poly_sub(const Poly& p, const Poly& q);
Poly poly_mul(const Poly& p, const Poly& q);
Poly poly_scale(const Poly& p, const Rational& c);

inline Poly operator+(const Poly& p, const Poly& q) { return poly_add(p, q); }
inline Poly operator-(const Poly& p, const Poly& q) { return poly_sub(p, q); }
inline Poly operator*(const Poly& p, const Poly& q) { return poly_mul(p, q); }
inline Poly operator*(const Rational& c, const Poly& p) { return poly_scale(p, c); }

/// Descending-power rendering, e.g. "-1/60 t^5 - 11/12 t^4 + 5/12 t^3".
std::string format_poly(const Poly& p);

/// Square matrix of Poly stored as integer numerator polynomials over a
/// single shared denominator.
class PolyMatrix {
 public:
  using IntPoly = std::vector<Integer>;

  explicit PolyMatrix(std::size_t dim = 1);
  /// Row-major entries; entries.size() must equal dim*dim.
  PolyMatrix(std::size_t dim, const std::vector<Poly>& entries);

  static PolyMatrix identity(std::size_t dim);
  /// Constant matrix from row-major rationals.
  static PolyMatrix constant(std::size_t dim, const std::vector<Rational>& values);

  std::size_t dim() const noexcept { return dim_; }
  Poly entry(std::size_t row, std::size_t col) const;
  /// Largest entry degree; -1 for the zero matrix.
  int degree() const noexcept;
  bool is_zero() const noexcept;

  const Integer& denominator() const noexcept { return den_; }
  const IntPoly& numerator(std::size_t row, std::size_t col) const { return num_[row * dim_ + col]; }

  RealMatrix evaluate(double t) const;
  std::vector<Rational> evaluate(const Rational& t) const;  // row-major

  PolyMatrix derivative() const;
  PolyMatrix antiderivative() const;

  friend bool operator==(const PolyMatrix& a, const PolyMatrix& b) {
    return a.dim_ == b.dim_ && a.den_ == b.den_ && a.num_ == b.num_;
  }

  friend PolyMatrix operator+(const PolyMatrix& a, const PolyMatrix& b);
  friend PolyMatrix operator-(const PolyMatrix& a, const PolyMatrix& b);
  friend PolyMatrix scale(const PolyMatrix& a, const Rational& c);
  friend PolyMatrix matmul(const PolyMatrix& a, const PolyMatrix& b);
  friend PolyMatrix commutator(const PolyMatrix& a, const PolyMatrix& b);
  /// Adds c * rhs to acc in place (the accumulation step of commutator sums).
  friend void accumulate(PolyMatrix& acc, const PolyMatrix& rhs, const Rational& c);

 private:
  PolyMatrix(std::size_t dim, std::vector<IntPoly> num, Integer den);
  void normalize();
  void check_degree() const;

  std::size_t dim_;
  std::vector<IntPoly> num_;
  Integer den_;
};

PolyMatrix operator+(const PolyMatrix& a, const PolyMatrix& b);
PolyMatrix operator-(const PolyMatrix& a, const PolyMatrix& b);
PolyMatrix scale(const PolyMatrix& a, const Rational& c);
PolyMatrix matmul(const PolyMatrix& a, const PolyMatrix& b);
PolyMatrix commutator(const PolyMatrix& a, const PolyMatrix& b);
void accumulate(PolyMatrix& acc, const PolyMatrix& rhs, const Rational& c);

/// Matrix function that is polynomial on each of m segments
/// [t_k, t_{k+1}). Polynomials are expressed in absolute time t.
class PiecewisePolyMatrix {
 public:
  PiecewisePolyMatrix(std::vector<Rational> breakpoints, std::vector<PolyMatrix> segments);

  static PiecewisePolyMatrix single(PolyMatrix segment, const Rational& t_begin, const Rational& t_end);
  /// The zero function on the same partition as `like`.
  static PiecewisePolyMatrix zero_like(const PiecewisePolyMatrix& like);

  std::size_t dim() const noexcept { return segments_.front().dim(); }
  const std::vector<Rational>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<PolyMatrix>& segments() const noexcept { return segments_; }
  std::size_t segment_count() const noexcept { return segments_.size(); }
  const Rational& t_begin() const noexcept { return breakpoints_.front(); }
  const Rational& t_end() const noexcept { return breakpoints_.back(); }
  int degree() const noexcept;
  bool is_zero() const noexcept;

  /// Active segment at t: right-continuous, except that t_end maps to the
  /// last segment. Throws DomainError outside [t_begin, t_end].
  std::size_t segment_index(double t) const;
  std::size_t segment_index(const Rational& t) const;

  bool same_partition(const PiecewisePolyMatrix& other) const { return breakpoints_ == other.breakpoints_; }

  friend bool operator==(const PiecewisePolyMatrix&, const PiecewisePolyMatrix&) = default;

 private:
  std::vector<Rational> breakpoints_;
  std::vector<PolyMatrix> segments_;
};

RealMatrix evaluate(const PiecewisePolyMatrix& a, double t);
std::vector<Rational> evaluate(const PiecewisePolyMatrix& a, const Rational& t);

/// Entrywise integral from t_begin; continuous across breakpoints and zero
/// at t_begin.
PiecewisePolyMatrix antiderivative(const PiecewisePolyMatrix& a);
/// Segmentwise derivative.
PiecewisePolyMatrix derivative(const PiecewisePolyMatrix& a);

PiecewisePolyMatrix operator+(const PiecewisePolyMatrix& a, const PiecewisePolyMatrix& b);
PiecewisePolyMatrix operator-(const PiecewisePolyMatrix& a, const PiecewisePolyMatrix& b);
PiecewisePolyMatrix scale(const PiecewisePolyMatrix& a, const Rational& c);
PiecewisePolyMatrix matmul(const PiecewisePolyMatrix& a, const PiecewisePolyMatrix& b);
PiecewisePolyMatrix commutator(const PiecewisePolyMatrix& a, const PiecewisePolyMatrix& b);
void accumulate(PiecewisePolyMatrix& acc, const PiecewisePolyMatrix& rhs, const Rational& c);

/// Cached double-double coefficients of a PiecewisePolyMatrix for fast,
/// compensated evaluation at many times.
class DenseEvaluator {
 public:
  DenseEvaluator() = default;
  explicit DenseEvaluator(const PiecewisePolyMatrix& a);

  std::size_t dim() const noexcept { return dim_; }
  double t_begin() const noexcept { return breaks_.front(); }
  double t_end() const noexcept { return breaks_.back(); }
  const std::vector<double>& breakpoints() const noexcept { return breaks_; }
  std::size_t segment_count() const noexcept { return segments_.size(); }
  RealMatrix operator()(double t) const { return on_segment(segment_index(t), t); }
  /// Evaluates segment k's polynomials at t, including at its right end.
  RealMatrix on_segment(std::size_t k, double t) const;
  std::size_t segment_index(double t) const;

 private:
  struct Entry {
    std::vector<double> hi;
    std::vector<double> lo;
  };
  std::size_t dim_ = 0;
  std::vector<double> breaks_;
  std::vector<std::vector<Entry>> segments_;  // [segment][row-major entry]
};

}  // namespace magnus
