#include "magnus/series.hpp"

#include <map>
#include <sstream>

#include "magnus/error.hpp"
#include "magnus/model_io.hpp"

namespace magnus {

Rational bernoulli(int k) {
  if (k < 0) throw InputError("bernoulli: index must be nonnegative");
  // Akiyama-Tanigawa; yields B_1 = +1/2, flipped to the B_1 = -1/2 convention.
  std::vector<Rational> a(static_cast<std::size_t>(k) + 1);
  for (int m = 0; m <= k; ++m) {
    a[static_cast<std::size_t>(m)] = Rational(1, m + 1);
    for (int j = m; j >= 1; --j) {
      a[static_cast<std::size_t>(j - 1)] = j * (a[static_cast<std::size_t>(j - 1)] - a[static_cast<std::size_t>(j)]);
    }
  }
  Rational b = a[0];
  if (k == 1) b = -b;
  return b;
}

// ------------------------------------------------------ MagnusSeries

MagnusSeries::MagnusSeries(PiecewisePolyMatrix source, std::vector<PiecewisePolyMatrix> terms)
    : source_(std::move(source)), terms_(std::move(terms)) {
  if (terms_.empty()) throw InputError("Magnus series needs at least one term");
  auto evals = std::make_shared<std::vector<DenseEvaluator>>();
  evals->reserve(terms_.size());
  for (const auto& term : terms_) {
    if (term.dim() != source_.dim()) throw DimensionMismatch("series term dimension differs from source");
    if (!term.same_partition(source_)) throw InputError("series term breakpoints differ from source");
    evals->emplace_back(term);
  }
  evaluators_ = std::move(evals);
}

const PiecewisePolyMatrix& MagnusSeries::term(int n) const {
  if (n < 1 || n > order()) throw DomainError("term index " + std::to_string(n) + " outside 1.." + std::to_string(order()));
  return terms_[static_cast<std::size_t>(n - 1)];
}

RealMatrix MagnusSeries::term_value(int n, double t) const {
  if (n < 1 || n > order()) throw DomainError("term index " + std::to_string(n) + " outside 1.." + std::to_string(order()));
  return (*evaluators_)[static_cast<std::size_t>(n - 1)](t);
}

// -------------------------------------------------------- recursion

MagnusSeries magnus_terms(const PiecewisePolyMatrix& a, int order) {
  if (order < 1) throw InputError("magnus_terms: order must be at least 1");
  const auto n_max = static_cast<std::size_t>(order);

  std::vector<PiecewisePolyMatrix> omega;
  omega.reserve(n_max);
  omega.push_back(antiderivative(a));

  // s[n][j] holds S_n^(j); index 0 unused in both dimensions.
  std::vector<std::vector<PiecewisePolyMatrix>> s(n_max + 1);
  const PiecewisePolyMatrix zero = PiecewisePolyMatrix::zero_like(a);

  std::vector<Rational> weight(n_max + 1);  // B_j / j!
  {
    Rational fact = 1;
    for (std::size_t j = 1; j <= n_max; ++j) {
      fact *= static_cast<unsigned long>(j);
      weight[j] = bernoulli(static_cast<int>(j)) / fact;
    }
  }

  for (std::size_t n = 2; n <= n_max; ++n) {
    s[n].assign(n, zero);
    s[n][1] = commutator(omega[n - 2], a);
    for (std::size_t j = 2; j + 1 <= n; ++j) {
      PiecewisePolyMatrix acc = zero;
      for (std::size_t m = 1; m + j <= n; ++m) {
        const auto& inner = s[n - m][j - 1];
        if (inner.is_zero() || omega[m - 1].is_zero()) continue;
        accumulate(acc, commutator(omega[m - 1], inner), 1);
      }
      s[n][j] = std::move(acc);
    }
    PiecewisePolyMatrix integrand = zero;
    for (std::size_t j = 1; j < n; ++j) {
      if (sgn(weight[j]) == 0) continue;
      accumulate(integrand, s[n][j], weight[j]);
    }
    omega.push_back(antiderivative(integrand));
  }
  return MagnusSeries(a, std::move(omega));
}

// ------------------------------------------------------------ oracle

namespace {

// Nested commutator over integration variables 0..n-1.
struct Bracket {
  int var = -1;  // leaf when >= 0
  std::shared_ptr<const Bracket> left;
  std::shared_ptr<const Bracket> right;
};
using BracketPtr = std::shared_ptr<const Bracket>;

BracketPtr leaf(int v) { return std::make_shared<const Bracket>(Bracket{v, nullptr, nullptr}); }
BracketPtr br(BracketPtr l, BracketPtr r) { return std::make_shared<const Bracket>(Bracket{-1, std::move(l), std::move(r)}); }

struct Word {
  int sign;
  std::vector<int> vars;  // matrix product order, left to right
};

std::vector<Word> expand(const Bracket& b) {
  if (b.var >= 0) return {Word{1, {b.var}}};
  const auto l = expand(*b.left);
  const auto r = expand(*b.right);
  std::vector<Word> out;
  for (const auto& x : l) {
    for (const auto& y : r) {
      Word lr{x.sign * y.sign, x.vars};
      lr.vars.insert(lr.vars.end(), y.vars.begin(), y.vars.end());
      Word rl{-x.sign * y.sign, y.vars};
      rl.vars.insert(rl.vars.end(), x.vars.begin(), x.vars.end());
      out.push_back(std::move(lr));
      out.push_back(std::move(rl));
    }
  }
  return out;
}

// Iterated integral: variable k runs over [0, tau_parent[k]], parent -1 is t.
struct IteratedIntegral {
  Rational coefficient;
  std::vector<int> parent;
  BracketPtr integrand;
};

// Monomial c * x^p.
struct Monomial {
  Rational c;
  long p;
};

// int over the tree region of prod_k tau_k^{e_k}, as a monomial in t.
Monomial region_integral(const std::vector<int>& parent, const std::vector<long>& exps) {
  const std::size_t n = parent.size();
  std::vector<Monomial> inner(n);  // value of variable k's subtree, as a monomial in tau_k
  // Children have larger indices than their parents in every region we use.
  for (std::size_t k = n; k-- > 0;) {
    Monomial m{1, exps[k]};
    for (std::size_t c = k + 1; c < n; ++c) {
      if (parent[c] == static_cast<int>(k)) {
        m.c *= inner[c].c;
        m.p += inner[c].p;
      }
    }
    // int_0^x tau^p dtau = x^{p+1} / (p+1)
    inner[k] = Monomial{m.c / Rational(m.p + 1), m.p + 1};
  }
  Monomial out{1, 0};
  for (std::size_t k = 0; k < n; ++k) {
    if (parent[k] == -1) {
      out.c *= inner[k].c;
      out.p += inner[k].p;
    }
  }
  return out;
}

std::vector<IteratedIntegral> oracle_integrals(int n) {
  const auto v = leaf;
  switch (n) {
    case 1:
      return {{1, {-1}, v(0)}};
    case 2:
      // -1/2 int int_{tau2<tau1} [A(tau2), A(tau1)]
      return {{Rational(-1, 2), {-1, 0}, br(v(1), v(0))}};
    case 3:
      // 1/4 int int int_{tau3<tau2<tau1} [[A3, A2], A1]
      // + 1/12 int_0^t int_0^{tau1} int_0^{tau1} [A3, [A2, A1]]
      return {{Rational(1, 4), {-1, 0, 1}, br(br(v(2), v(1)), v(0))},
              {Rational(1, 12), {-1, 0, 0}, br(v(2), br(v(1), v(0)))}};
    case 4:
      // 1/12 int_{t>t1>t2>t3>t4} [[[A1,A2],A3],A4] + [A1,[[A2,A3],A4]]
      //                         + [A1,[A2,[A3,A4]]] + [A2,[A3,[A4,A1]]]
      return {{Rational(1, 12), {-1, 0, 1, 2}, br(br(br(v(0), v(1)), v(2)), v(3))},
              {Rational(1, 12), {-1, 0, 1, 2}, br(v(0), br(br(v(1), v(2)), v(3)))},
              {Rational(1, 12), {-1, 0, 1, 2}, br(v(0), br(v(1), br(v(2), v(3))))},
              {Rational(1, 12), {-1, 0, 1, 2}, br(v(1), br(v(2), br(v(3), v(0))))}};
    default:
      throw InputError("magnus_terms_oracle: only orders 1..4 are available");
  }
}

}  // namespace

PiecewisePolyMatrix magnus_terms_oracle(const PiecewisePolyMatrix& a, int n) {
  if (a.segment_count() != 1) throw InputError("magnus_terms_oracle: needs a single polynomial segment");
  if (sgn(a.t_begin()) != 0) throw InputError("magnus_terms_oracle: domain must start at t = 0");
  const PolyMatrix& seg = a.segments().front();
  const std::size_t dim = a.dim();
  const int deg = seg.degree();

  // A(t) = sum_k coeff[k] t^k with constant rational matrices.
  std::vector<PolyMatrix> coeff;
  for (int k = 0; k <= deg; ++k) {
    std::vector<Rational> values(dim * dim);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        values[i * dim + j] = seg.entry(i, j).coefficient(static_cast<std::size_t>(k));
      }
    }
    coeff.push_back(PolyMatrix::constant(dim, values));
  }

  std::map<long, PolyMatrix> by_power;
  for (const auto& integral : oracle_integrals(n)) {
    const auto words = expand(*integral.integrand);
    const std::size_t vars = integral.parent.size();
    std::vector<long> exps(vars, 0);
    // Enumerate every assignment of a coefficient degree to each variable.
    while (true) {
      const Monomial scalar = region_integral(integral.parent, exps);
      const Rational weight = integral.coefficient * scalar.c;
      PolyMatrix sum(dim);
      for (const auto& w : words) {
        PolyMatrix prod = coeff[static_cast<std::size_t>(exps[static_cast<std::size_t>(w.vars[0])])];
        for (std::size_t q = 1; q < w.vars.size(); ++q) {
          prod = matmul(prod, coeff[static_cast<std::size_t>(exps[static_cast<std::size_t>(w.vars[q])])]);
        }
        accumulate(sum, prod, w.sign);
      }
      auto [it, inserted] = by_power.try_emplace(scalar.p, PolyMatrix(dim));
      accumulate(it->second, sum, weight);

      std::size_t k = 0;
      while (k < vars && ++exps[k] > deg) exps[k++] = 0;
      if (k == vars) break;
    }
  }

  PolyMatrix result(dim);
  for (const auto& [power, c] : by_power) {
    std::vector<Poly> mono(dim * dim);
    for (std::size_t i = 0; i < dim; ++i) mono[i * dim + i] = Poly::monomial(1, static_cast<int>(power));
    accumulate(result, matmul(c, PolyMatrix(dim, mono)), 1);
  }
  return PiecewisePolyMatrix(a.breakpoints(), {result});
}

// ------------------------------------------------------- evaluation

namespace {

void check_order(const MagnusSeries& s, int n) {
  if (n < 1 || n > s.order()) {
    throw DomainError("partial sum order " + std::to_string(n) + " outside 1.." + std::to_string(s.order()));
  }
}

}  // namespace

RealMatrix partial_sum(const MagnusSeries& s, int n, double t) {
  check_order(s, n);
  RealMatrix acc = s.term_value(1, t);
  for (int k = 2; k <= n; ++k) acc += s.term_value(k, t);
  return acc;
}

ComplexMatrix kappa_scaled(const MagnusSeries& s, Complex kappa, int n, double t) {
  check_order(s, n);
  const auto d = static_cast<Eigen::Index>(s.dim());
  ComplexMatrix acc = ComplexMatrix::Zero(d, d);
  Complex power = 1.0;
  for (int k = 1; k <= n; ++k) {
    power *= kappa;
    acc += power * s.term_value(k, t).cast<Complex>();
  }
  return acc;
}

double dexpinv_residual(const MagnusSeries& s, double t, int K) {
  if (K < 0) throw InputError("dexpinv_residual: K must be nonnegative");
  const RealMatrix omega = partial_sum(s, s.order(), t);
  RealMatrix omega_dot = evaluate(s.source(), t);  // Omega_1' = A
  for (int n = 2; n <= s.order(); ++n) omega_dot += evaluate(derivative(s.term(n)), t);

  const RealMatrix a = evaluate(s.source(), t);
  RealMatrix ad = a;  // ad_Omega^k (A)
  RealMatrix series = a;
  Rational fact = 1;
  for (int k = 1; k <= K; ++k) {
    ad = omega * ad - ad * omega;
    fact *= k;
    const Rational w = bernoulli(k) / fact;
    if (sgn(w) != 0) series += w.get_d() * ad;
  }
  return spectral_norm(RealMatrix(omega_dot - series));
}

// --------------------------------------------------------------- BCH

PiecewisePolyMatrix bch_generator(std::size_t dim, const std::vector<Rational>& a1, const std::vector<Rational>& a2) {
  if (a1.size() != dim * dim || a2.size() != dim * dim) throw DimensionMismatch("bch: matrices must be dim x dim");
  return PiecewisePolyMatrix({0, 1, 2}, {PolyMatrix::constant(dim, a2), PolyMatrix::constant(dim, a1)});
}

MagnusSeries bch_terms(std::size_t dim, const std::vector<Rational>& a1, const std::vector<Rational>& a2, int order) {
  return magnus_terms(bch_generator(dim, a1, a2), order);
}

// ------------------------------------------------------ serialization

std::string format_series(const MagnusSeries& s) {
  std::ostringstream os;
  os << "series " << s.order() << "\n";
  os << "source\n" << format_model(s.source());
  for (int n = 1; n <= s.order(); ++n) os << "term " << n << "\n" << format_model(s.term(n));
  return os.str();
}

MagnusSeries parse_series(std::string_view text) {
  const auto lines = detail::significant_lines(text);
  std::size_t pos = 0;
  auto expect = [&](const std::string& want) {
    if (pos >= lines.size() || lines[pos].rfind(want, 0) != 0) {
      throw ParseError("expected '" + want + "' in series document");
    }
    return lines[pos++];
  };
  const std::string header = expect("series");
  int order = 0;
  try {
    order = std::stoi(header.substr(6));
  } catch (const std::logic_error&) {
    throw ParseError("bad series header '" + header + "'");
  }
  if (order < 1) throw ParseError("series order must be positive");
  expect("source");
  PiecewisePolyMatrix source = detail::parse_model_block(lines, pos);
  std::vector<PiecewisePolyMatrix> terms;
  for (int n = 1; n <= order; ++n) {
    const std::string h = expect("term");
    if (h != "term " + std::to_string(n)) throw ParseError("expected 'term " + std::to_string(n) + "', found '" + h + "'");
    terms.push_back(detail::parse_model_block(lines, pos));
  }
  if (pos != lines.size()) throw ParseError("trailing content after series");
  return MagnusSeries(std::move(source), std::move(terms));
}

}  // namespace magnus
