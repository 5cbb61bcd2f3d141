#include "magnus/polymat.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <sstream>

#include "magnus/error.hpp"

namespace magnus {

namespace {

std::atomic<int> g_max_degree{512};

void trim(std::vector<Rational>& c) {
  while (!c.empty() && sgn(c.back()) == 0) c.pop_back();
}

void trim(PolyMatrix::IntPoly& c) {
  while (!c.empty() && sgn(c.back()) == 0) c.pop_back();
}

Rational from_double(double x) {
  Rational r;
  mpq_set_d(r.get_mpq_t(), x);
  return r;
}

// num/den rounded to double without overflowing on large operands.
double ratio_to_double(const Integer& num, const Integer& den) {
  if (sgn(num) == 0) return 0.0;
  long num_exp = 0;
  long den_exp = 0;
  const double num_m = mpz_get_d_2exp(&num_exp, num.get_mpz_t());
  const double den_m = mpz_get_d_2exp(&den_exp, den.get_mpz_t());
  return std::ldexp(num_m / den_m, static_cast<int>(num_exp - den_exp));
}

// out += sign * (a * b), coefficient convolution.
void mul_accumulate(PolyMatrix::IntPoly& out, const PolyMatrix::IntPoly& a, const PolyMatrix::IntPoly& b,
                    int sign) {
  if (a.empty() || b.empty()) return;
  const std::size_t need = a.size() + b.size() - 1;
  if (out.size() < need) out.resize(need);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (sgn(a[i]) == 0) continue;
    const mpz_srcptr ai = a[i].get_mpz_t();
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (sign > 0) {
        mpz_addmul(out[i + j].get_mpz_t(), ai, b[j].get_mpz_t());
      } else {
        mpz_submul(out[i + j].get_mpz_t(), ai, b[j].get_mpz_t());
      }
    }
  }
}

Integer lcm_upto(long n) {
  Integer l = 1;
  for (long k = 2; k <= n; ++k) {
    mpz_lcm_ui(l.get_mpz_t(), l.get_mpz_t(), static_cast<unsigned long>(k));
  }
  return l;
}

}  // namespace

int max_degree() { return g_max_degree.load(); }

void set_max_degree(int degree) {
  if (degree < 0) throw InputError("max degree must be nonnegative");
  g_max_degree.store(degree);
}

Rational parse_rational(const std::string& raw) {
  std::string text;
  for (char ch : raw) {
    if (!std::isspace(static_cast<unsigned char>(ch))) text.push_back(ch);
  }
  // Accept the unicode minus sign used in printed matrices.
  for (std::size_t pos; (pos = text.find("\xE2\x88\x92")) != std::string::npos;) text.replace(pos, 3, "-");
  if (text.empty()) throw ParseError("empty rational literal");

  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      Integer num(text.substr(0, slash), 10);
      Integer den(text.substr(slash + 1), 10);
      if (sgn(den) == 0) throw ParseError("zero denominator in '" + raw + "'");
      Rational r(num, den);
      r.canonicalize();
      return r;
    }
    // Decimal literal, converted exactly.
    std::size_t i = 0;
    bool negative = false;
    if (text[i] == '+' || text[i] == '-') negative = text[i++] == '-';
    std::string digits;
    long scale = 0;
    bool seen_dot = false;
    bool any_digit = false;
    for (; i < text.size() && text[i] != 'e' && text[i] != 'E'; ++i) {
      const char ch = text[i];
      if (ch == '.') {
        if (seen_dot) throw ParseError("bad number '" + raw + "'");
        seen_dot = true;
      } else if (std::isdigit(static_cast<unsigned char>(ch))) {
        digits.push_back(ch);
        any_digit = true;
        if (seen_dot) --scale;
      } else {
        throw ParseError("bad number '" + raw + "'");
      }
    }
    if (!any_digit) throw ParseError("bad number '" + raw + "'");
    if (i < text.size()) scale += std::stol(text.substr(i + 1));
    Integer mant(digits, 10);
    if (negative) mant = -mant;
    Integer p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(scale)));
    Rational r = scale >= 0 ? Rational(mant * p10) : Rational(mant, p10);
    r.canonicalize();
    return r;
  } catch (const std::invalid_argument&) {
    throw ParseError("bad number '" + raw + "'");
  } catch (const std::out_of_range&) {
    throw ParseError("bad number '" + raw + "'");
  }
}

std::string format_rational(const Rational& value) { return value.get_str(10); }

// ---------------------------------------------------------------- Poly

Poly::Poly(std::vector<Rational> coefficients) : coeffs_(std::move(coefficients)) {
  for (auto& c : coeffs_) c.canonicalize();
  trim(coeffs_);
}

Poly Poly::constant(const Rational& value) { return Poly({value}); }

Poly Poly::monomial(const Rational& coefficient, int power) {
  if (power < 0) throw InputError("negative monomial power");
  std::vector<Rational> c(static_cast<std::size_t>(power) + 1);
  c.back() = coefficient;
  return Poly(std::move(c));
}

Rational Poly::coefficient(std::size_t power) const {
  return power < coeffs_.size() ? coeffs_[power] : Rational(0);
}

double Poly::evaluate(double t) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + it->get_d();
  return acc;
}

Rational Poly::evaluate(const Rational& t) const {
  Rational acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + *it;
  return acc;
}

Poly Poly::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<Rational> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = coeffs_[k] * static_cast<long>(k);
  return Poly(std::move(d));
}

Poly Poly::antiderivative() const {
  if (coeffs_.empty()) return {};
  std::vector<Rational> a(coeffs_.size() + 1);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) a[k + 1] = coeffs_[k] / Rational(static_cast<long>(k + 1));
  return Poly(std::move(a));
}

Poly poly_add(const Poly& p, const Poly& q) {
  std::vector<Rational> c(std::max(p.coefficients().size(), q.coefficients().size()));
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = p.coefficient(i) + q.coefficient(i);
  return Poly(std::move(c));
}

Poly poly_sub(const Poly& p, const Poly& q) { return poly_add(p, poly_scale(q, -1)); }

Poly poly_mul(const Poly& p, const Poly& q) {
  if (p.is_zero() || q.is_zero()) return {};
  const auto& a = p.coefficients();
  const auto& b = q.coefficients();
  std::vector<Rational> c(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  }
  if (static_cast<int>(c.size()) - 1 > max_degree()) throw DegreeOverflow("polynomial degree exceeds guard");
  return Poly(std::move(c));
}

Poly poly_scale(const Poly& p, const Rational& c) {
  std::vector<Rational> out = p.coefficients();
  for (auto& x : out) x *= c;
  return Poly(std::move(out));
}

std::string format_poly(const Poly& p) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int k = p.degree(); k >= 0; --k) {
    Rational c = p.coefficient(static_cast<std::size_t>(k));
    if (sgn(c) == 0) continue;
    if (first) {
      if (sgn(c) < 0) os << '-';
    } else {
      os << (sgn(c) < 0 ? " - " : " + ");
    }
    c = abs(c);
    const bool unit = c == 1;
    const bool fraction = c.get_den() != 1;
    if (k == 0) {
      os << format_rational(c);
    } else {
      if (!unit) os << format_rational(c) << (fraction ? " " : "");
      os << 't';
      if (k > 1) os << '^' << k;
    }
    first = false;
  }
  return os.str();
}

// ---------------------------------------------------------- PolyMatrix

PolyMatrix::PolyMatrix(std::size_t dim) : dim_(dim), num_(dim * dim), den_(1) {
  if (dim == 0) throw DimensionMismatch("matrix dimension must be positive");
}

PolyMatrix::PolyMatrix(std::size_t dim, std::vector<IntPoly> num, Integer den)
    : dim_(dim), num_(std::move(num)), den_(std::move(den)) {
  normalize();
}

PolyMatrix::PolyMatrix(std::size_t dim, const std::vector<Poly>& entries) : PolyMatrix(dim) {
  if (entries.size() != dim * dim) throw DimensionMismatch("entry count does not match dim*dim");
  Integer common = 1;
  for (const auto& p : entries) {
    for (const auto& c : p.coefficients()) {
      mpz_lcm(common.get_mpz_t(), common.get_mpz_t(), c.get_den_mpz_t());
    }
  }
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const auto& c = entries[e].coefficients();
    num_[e].resize(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) {
      num_[e][k] = c[k].get_num() * (common / c[k].get_den());
    }
  }
  den_ = common;
  normalize();
}

PolyMatrix PolyMatrix::identity(std::size_t dim) {
  PolyMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.num_[i * dim + i] = {Integer(1)};
  return m;
}

PolyMatrix PolyMatrix::constant(std::size_t dim, const std::vector<Rational>& values) {
  if (values.size() != dim * dim) throw DimensionMismatch("entry count does not match dim*dim");
  std::vector<Poly> entries;
  entries.reserve(values.size());
  for (const auto& v : values) entries.push_back(Poly::constant(v));
  return PolyMatrix(dim, entries);
}

void PolyMatrix::normalize() {
  for (auto& p : num_) trim(p);
  if (sgn(den_) < 0) {
    den_ = -den_;
    for (auto& p : num_) {
      for (auto& c : p) c = -c;
    }
  }
  if (is_zero()) {
    den_ = 1;
    return;
  }
  Integer g = den_;
  for (const auto& p : num_) {
    for (const auto& c : p) {
      if (g == 1) break;
      mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
    }
  }
  if (g != 1) {
    mpz_divexact(den_.get_mpz_t(), den_.get_mpz_t(), g.get_mpz_t());
    for (auto& p : num_) {
      for (auto& c : p) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), g.get_mpz_t());
    }
  }
  check_degree();
}

void PolyMatrix::check_degree() const {
  if (degree() > max_degree()) {
    throw DegreeOverflow("polynomial matrix degree " + std::to_string(degree()) + " exceeds guard " +
                         std::to_string(max_degree()));
  }
}

Poly PolyMatrix::entry(std::size_t row, std::size_t col) const {
  if (row >= dim_ || col >= dim_) throw DomainError("entry index out of range");
  const auto& n = num_[row * dim_ + col];
  std::vector<Rational> c(n.size());
  for (std::size_t k = 0; k < n.size(); ++k) c[k] = Rational(n[k], den_);
  return Poly(std::move(c));
}

int PolyMatrix::degree() const noexcept {
  int d = -1;
  for (const auto& p : num_) d = std::max(d, static_cast<int>(p.size()) - 1);
  return d;
}

bool PolyMatrix::is_zero() const noexcept {
  return std::all_of(num_.begin(), num_.end(), [](const IntPoly& p) { return p.empty(); });
}

RealMatrix PolyMatrix::evaluate(double t) const {
  RealMatrix out(dim_, dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) {
      const auto& n = num_[i * dim_ + j];
      double acc = 0.0;
      for (auto it = n.rbegin(); it != n.rend(); ++it) acc = acc * t + ratio_to_double(*it, den_);
      out(i, j) = acc;
    }
  }
  return out;
}

std::vector<Rational> PolyMatrix::evaluate(const Rational& t) const {
  std::vector<Rational> out(dim_ * dim_);
  for (std::size_t e = 0; e < num_.size(); ++e) {
    Rational acc = 0;
    for (auto it = num_[e].rbegin(); it != num_[e].rend(); ++it) acc = acc * t + Rational(*it);
    out[e] = acc / Rational(den_);
  }
  return out;
}

PolyMatrix PolyMatrix::derivative() const {
  std::vector<IntPoly> d(num_.size());
  for (std::size_t e = 0; e < num_.size(); ++e) {
    const auto& n = num_[e];
    if (n.size() <= 1) continue;
    d[e].resize(n.size() - 1);
    for (std::size_t k = 1; k < n.size(); ++k) d[e][k - 1] = n[k] * static_cast<unsigned long>(k);
  }
  return PolyMatrix(dim_, std::move(d), den_);
}

PolyMatrix PolyMatrix::antiderivative() const {
  const int deg = degree();
  if (deg < 0) return PolyMatrix(dim_);
  const Integer l = lcm_upto(deg + 1);
  std::vector<IntPoly> a(num_.size());
  for (std::size_t e = 0; e < num_.size(); ++e) {
    const auto& n = num_[e];
    if (n.empty()) continue;
    a[e].resize(n.size() + 1);
    for (std::size_t k = 0; k < n.size(); ++k) {
      Integer f;
      mpz_divexact_ui(f.get_mpz_t(), l.get_mpz_t(), static_cast<unsigned long>(k + 1));
      a[e][k + 1] = n[k] * f;
    }
  }
  return PolyMatrix(dim_, std::move(a), den_ * l);
}

PolyMatrix operator+(const PolyMatrix& a, const PolyMatrix& b) {
  PolyMatrix out = a;
  accumulate(out, b, 1);
  return out;
}

PolyMatrix operator-(const PolyMatrix& a, const PolyMatrix& b) {
  PolyMatrix out = a;
  accumulate(out, b, -1);
  return out;
}

PolyMatrix scale(const PolyMatrix& a, const Rational& c) {
  if (sgn(c) == 0) return PolyMatrix(a.dim_);
  std::vector<PolyMatrix::IntPoly> n = a.num_;
  const Integer& p = c.get_num();
  for (auto& poly : n) {
    for (auto& x : poly) x *= p;
  }
  return PolyMatrix(a.dim_, std::move(n), a.den_ * c.get_den());
}

void accumulate(PolyMatrix& acc, const PolyMatrix& rhs, const Rational& c) {
  if (acc.dim_ != rhs.dim_) throw DimensionMismatch("accumulate: dimension mismatch");
  if (sgn(c) == 0 || rhs.is_zero()) return;
  if (acc.is_zero()) {
    acc = scale(rhs, c);
    return;
  }
  // acc.num/acc.den + p*rhs.num/(q*rhs.den) over L = lcm(acc.den, q*rhs.den).
  const Integer rhs_den = rhs.den_ * c.get_den();
  Integer l;
  mpz_lcm(l.get_mpz_t(), acc.den_.get_mpz_t(), rhs_den.get_mpz_t());
  const Integer acc_factor = l / acc.den_;
  const Integer rhs_factor = (l / rhs_den) * c.get_num();
  for (std::size_t e = 0; e < acc.num_.size(); ++e) {
    auto& out = acc.num_[e];
    if (acc_factor != 1) {
      for (auto& x : out) x *= acc_factor;
    }
    const auto& r = rhs.num_[e];
    if (out.size() < r.size()) out.resize(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
      mpz_addmul(out[k].get_mpz_t(), r[k].get_mpz_t(), rhs_factor.get_mpz_t());
    }
  }
  acc.den_ = l;
  acc.normalize();
}

PolyMatrix matmul(const PolyMatrix& a, const PolyMatrix& b) {
  if (a.dim_ != b.dim_) throw DimensionMismatch("matmul: dimension mismatch");
  const std::size_t n = a.dim_;
  std::vector<PolyMatrix::IntPoly> out(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) mul_accumulate(out[i * n + j], a.num_[i * n + k], b.num_[k * n + j], +1);
    }
  }
  return PolyMatrix(n, std::move(out), a.den_ * b.den_);
}

PolyMatrix commutator(const PolyMatrix& a, const PolyMatrix& b) {
  if (a.dim_ != b.dim_) throw DimensionMismatch("commutator: dimension mismatch");
  const std::size_t n = a.dim_;
  std::vector<PolyMatrix::IntPoly> out(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      auto& dst = out[i * n + j];
      for (std::size_t k = 0; k < n; ++k) {
        mul_accumulate(dst, a.num_[i * n + k], b.num_[k * n + j], +1);
        mul_accumulate(dst, b.num_[i * n + k], a.num_[k * n + j], -1);
      }
    }
  }
  return PolyMatrix(n, std::move(out), a.den_ * b.den_);
}

// ------------------------------------------------- PiecewisePolyMatrix

PiecewisePolyMatrix::PiecewisePolyMatrix(std::vector<Rational> breakpoints, std::vector<PolyMatrix> segments)
    : breakpoints_(std::move(breakpoints)), segments_(std::move(segments)) {
  if (segments_.empty()) throw InputError("piecewise matrix needs at least one segment");
  if (breakpoints_.size() != segments_.size() + 1) {
    throw InputError("piecewise matrix needs exactly one more breakpoint than segments");
  }
  for (auto& b : breakpoints_) b.canonicalize();
  for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k) {
    if (!(breakpoints_[k] < breakpoints_[k + 1])) throw InputError("breakpoints must be strictly increasing");
  }
  for (const auto& s : segments_) {
    if (s.dim() != segments_.front().dim()) throw DimensionMismatch("segments differ in dimension");
  }
}

PiecewisePolyMatrix PiecewisePolyMatrix::single(PolyMatrix segment, const Rational& t_begin, const Rational& t_end) {
  return PiecewisePolyMatrix({t_begin, t_end}, {std::move(segment)});
}

PiecewisePolyMatrix PiecewisePolyMatrix::zero_like(const PiecewisePolyMatrix& like) {
  return PiecewisePolyMatrix(like.breakpoints_, std::vector<PolyMatrix>(like.segment_count(), PolyMatrix(like.dim())));
}

int PiecewisePolyMatrix::degree() const noexcept {
  int d = -1;
  for (const auto& s : segments_) d = std::max(d, s.degree());
  return d;
}

bool PiecewisePolyMatrix::is_zero() const noexcept {
  return std::all_of(segments_.begin(), segments_.end(), [](const PolyMatrix& s) { return s.is_zero(); });
}

std::size_t PiecewisePolyMatrix::segment_index(const Rational& t) const {
  if (t < breakpoints_.front() || t > breakpoints_.back()) {
    throw DomainError("t = " + std::to_string(t.get_d()) + " outside domain [" +
                      std::to_string(breakpoints_.front().get_d()) + ", " +
                      std::to_string(breakpoints_.back().get_d()) + "]");
  }
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  const auto k = static_cast<std::size_t>(it - breakpoints_.begin());
  return std::min(k, segments_.size()) - 1;
}

std::size_t PiecewisePolyMatrix::segment_index(double t) const {
  if (!std::isfinite(t)) throw DomainError("t must be finite");
  return segment_index(from_double(t));
}

namespace {

void require_same_partition(const PiecewisePolyMatrix& a, const PiecewisePolyMatrix& b, const char* what) {
  if (a.dim() != b.dim()) throw DimensionMismatch(std::string(what) + ": dimension mismatch");
  if (!a.same_partition(b)) throw InputError(std::string(what) + ": operands use different breakpoints");
}

template <typename Op>
PiecewisePolyMatrix segmentwise(const PiecewisePolyMatrix& a, const PiecewisePolyMatrix& b, const char* what, Op op) {
  require_same_partition(a, b, what);
  std::vector<PolyMatrix> segs;
  segs.reserve(a.segment_count());
  for (std::size_t k = 0; k < a.segment_count(); ++k) segs.push_back(op(a.segments()[k], b.segments()[k]));
  return PiecewisePolyMatrix(a.breakpoints(), std::move(segs));
}

}  // namespace

RealMatrix evaluate(const PiecewisePolyMatrix& a, double t) { return a.segments()[a.segment_index(t)].evaluate(t); }

std::vector<Rational> evaluate(const PiecewisePolyMatrix& a, const Rational& t) {
  return a.segments()[a.segment_index(t)].evaluate(t);
}

PiecewisePolyMatrix antiderivative(const PiecewisePolyMatrix& a) {
  const std::size_t n = a.dim();
  std::vector<PolyMatrix> segs;
  segs.reserve(a.segment_count());
  std::vector<Rational> carried(n * n);  // accumulated integral at the left breakpoint
  for (std::size_t k = 0; k < a.segment_count(); ++k) {
    const PolyMatrix raw = a.segments()[k].antiderivative();
    const Rational& left = a.breakpoints()[k];
    std::vector<Rational> offset = raw.evaluate(left);
    for (std::size_t e = 0; e < offset.size(); ++e) offset[e] = carried[e] - offset[e];
    PolyMatrix seg = raw + PolyMatrix::constant(n, offset);
    carried = seg.evaluate(a.breakpoints()[k + 1]);
    segs.push_back(std::move(seg));
  }
  return PiecewisePolyMatrix(a.breakpoints(), std::move(segs));
}

PiecewisePolyMatrix derivative(const PiecewisePolyMatrix& a) {
  std::vector<PolyMatrix> segs;
  segs.reserve(a.segment_count());
  for (const auto& s : a.segments()) segs.push_back(s.derivative());
  return PiecewisePolyMatrix(a.breakpoints(), std::move(segs));
}

PiecewisePolyMatrix operator+(const PiecewisePolyMatrix& a, const PiecewisePolyMatrix& b) {
  return segmentwise(a, b, "add", [](const PolyMatrix& x, const PolyMatrix& y) { return x + y; });
}

PiecewisePolyMatrix operator-(const PiecewisePolyMatrix& a, const PiecewisePolyMatrix& b) {
  return segmentwise(a, b, "subtract", [](const PolyMatrix& x, const PolyMatrix& y) { return x - y; });
}

PiecewisePolyMatrix scale(const PiecewisePolyMatrix& a, const Rational& c) {
  std::vector<PolyMatrix> segs;
  segs.reserve(a.segment_count());
  for (const auto& s : a.segments()) segs.push_back(scale(s, c));
  return PiecewisePolyMatrix(a.breakpoints(), std::move(segs));
}

PiecewisePolyMatrix matmul(const PiecewisePolyMatrix& a, const PiecewisePolyMatrix& b) {
  return segmentwise(a, b, "matmul", [](const PolyMatrix& x, const PolyMatrix& y) { return matmul(x, y); });
}

PiecewisePolyMatrix commutator(const PiecewisePolyMatrix& a, const PiecewisePolyMatrix& b) {
  return segmentwise(a, b, "commutator", [](const PolyMatrix& x, const PolyMatrix& y) { return commutator(x, y); });
}

void accumulate(PiecewisePolyMatrix& acc, const PiecewisePolyMatrix& rhs, const Rational& c) {
  require_same_partition(acc, rhs, "accumulate");
  std::vector<PolyMatrix> segs = acc.segments();
  for (std::size_t k = 0; k < segs.size(); ++k) accumulate(segs[k], rhs.segments()[k], c);
  acc = PiecewisePolyMatrix(acc.breakpoints(), std::move(segs));
}

// ------------------------------------------------------ DenseEvaluator

DenseEvaluator::DenseEvaluator(const PiecewisePolyMatrix& a) : dim_(a.dim()) {
  for (const auto& b : a.breakpoints()) breaks_.push_back(b.get_d());
  segments_.reserve(a.segment_count());
  for (const auto& seg : a.segments()) {
    std::vector<Entry> entries(dim_ * dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = 0; j < dim_; ++j) {
        const auto& n = seg.numerator(i, j);
        Entry& e = entries[i * dim_ + j];
        e.hi.resize(n.size());
        e.lo.resize(n.size());
        for (std::size_t k = 0; k < n.size(); ++k) {
          Rational exact(n[k], seg.denominator());
          exact.canonicalize();
          e.hi[k] = ratio_to_double(n[k], seg.denominator());
          e.lo[k] = Rational(exact - from_double(e.hi[k])).get_d();
        }
      }
    }
    segments_.push_back(std::move(entries));
  }
}

std::size_t DenseEvaluator::segment_index(double t) const {
  if (!(t >= breaks_.front() && t <= breaks_.back())) {
    throw DomainError("t = " + std::to_string(t) + " outside domain [" + std::to_string(breaks_.front()) + ", " +
                      std::to_string(breaks_.back()) + "]");
  }
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  const auto k = static_cast<std::size_t>(it - breaks_.begin());
  return std::min(k, segments_.size()) - 1;
}

RealMatrix DenseEvaluator::on_segment(std::size_t k, double t) const {
  const auto& seg = segments_.at(k);
  RealMatrix out(dim_, dim_);
  for (std::size_t e = 0; e < seg.size(); ++e) {
    const Entry& c = seg[e];
    // Horner in double-double arithmetic.
    double hi = 0.0;
    double lo = 0.0;
    for (std::size_t k = c.hi.size(); k-- > 0;) {
      const double p = hi * t;
      const double perr = std::fma(hi, t, -p) + lo * t;
      const double s = p + c.hi[k];
      const double bb = s - p;
      const double serr = (p - (s - bb)) + (c.hi[k] - bb);
      const double l = perr + serr + c.lo[k];
      hi = s + l;
      lo = l - (hi - s);
    }
    out(static_cast<Eigen::Index>(e / dim_), static_cast<Eigen::Index>(e % dim_)) = hi + lo;
  }
  return out;
}

}  // namespace magnus
