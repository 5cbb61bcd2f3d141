#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "magnus/error.hpp"
#include "magnus/model_io.hpp"
#include "magnus/polymat.hpp"
#include "support.hpp"

using namespace magnus;
using magnus::testing::poly_matrix;
using magnus::testing::random_model;
using magnus::testing::random_poly_matrix;

TEST_CASE("parse_rational accepts fractions and decimals exactly") {
  CHECK(parse_rational("3") == Rational(3));
  CHECK(parse_rational("-1/4") == Rational(-1, 4));
  CHECK(parse_rational("6/8") == Rational(3, 4));
  CHECK(parse_rational("0.125") == Rational(1, 8));
  CHECK(parse_rational("-2.5") == Rational(-5, 2));
  CHECK(parse_rational("1e-2") == Rational(1, 100));
  CHECK_THROWS_AS(parse_rational(""), ParseError);
  CHECK_THROWS_AS(parse_rational("1/0"), ParseError);
  CHECK_THROWS_AS(parse_rational("abc"), ParseError);
  CHECK_THROWS_AS(parse_rational("1.2.3"), ParseError);
  CHECK(format_rational(Rational(-7, 3)) == "-7/3");
  CHECK(format_rational(Rational(4)) == "4");
}

TEST_CASE("Poly arithmetic") {
  Poly p({1, 2});      // 1 + 2t
  Poly q({0, 0, 3});   // 3t^2
  CHECK((p * q) == Poly({0, 0, 3, 6}));
  CHECK((p + q) == Poly({1, 2, 3}));
  CHECK((p - p).is_zero());
  CHECK((p - p).degree() == -1);
  CHECK(q.derivative() == Poly({0, 6}));
  CHECK(q.antiderivative() == Poly({0, 0, 0, 1}));
  CHECK(p.evaluate(Rational(1, 2)) == Rational(2));
  CHECK(q.evaluate(2.0) == doctest::Approx(12.0));
  CHECK(Poly({1, 0, 0}).degree() == 0);
  CHECK(Poly::monomial(Rational(1, 80), 5).coefficient(5) == Rational(1, 80));
  CHECK(Poly::monomial(1, 5).coefficient(9) == 0);
}

TEST_CASE("format_poly uses descending powers") {
  Poly p({0, 0, 0, Rational(5, 12), Rational(-11, 12), Rational(-1, 60)});
  CHECK(format_poly(p) == "-1/60 t^5 - 11/12 t^4 + 5/12 t^3");
  CHECK(format_poly(Poly()) == "0");
  CHECK(format_poly(Poly({2, 1})) == "t + 2");
  CHECK(format_poly(Poly({0, -1})) == "-t");
}

TEST_CASE("PolyMatrix algebra matches pointwise evaluation") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t dim = 2 + trial % 3;
    PolyMatrix a = random_poly_matrix(rng, dim, 2);
    PolyMatrix b = random_poly_matrix(rng, dim, 3);
    double t = 0.3 + 0.1 * trial;
    RealMatrix ea = a.evaluate(t), eb = b.evaluate(t);
    CHECK((matmul(a, b).evaluate(t) - ea * eb).norm() < 1e-9);
    CHECK((commutator(a, b).evaluate(t) - (ea * eb - eb * ea)).norm() < 1e-9);
    CHECK(((a + b).evaluate(t) - (ea + eb)).norm() < 1e-12);
    CHECK(((a - b).evaluate(t) - (ea - eb)).norm() < 1e-12);
    CHECK((scale(a, Rational(-3, 7)).evaluate(t) - ea * (-3.0 / 7.0)).norm() < 1e-12);
    CHECK(a.antiderivative().derivative() == a);
    CHECK(commutator(a, a).is_zero());

    PolyMatrix acc = a;
    accumulate(acc, b, Rational(2, 3));
    CHECK(acc == a + scale(b, Rational(2, 3)));
  }
}

TEST_CASE("PolyMatrix exact evaluation and entries") {
  PolyMatrix m = poly_matrix(2, {{2}, {0, 1}, {}, {-1}});
  CHECK(m.degree() == 1);
  CHECK(m.entry(0, 1) == Poly({0, 1}));
  auto v = m.evaluate(Rational(3, 2));
  CHECK(v == std::vector<Rational>{2, Rational(3, 2), 0, -1});
  CHECK_THROWS_AS(m.entry(2, 0), DomainError);
  CHECK(PolyMatrix::identity(3).evaluate(0.7).isIdentity());
  CHECK_THROWS_AS(PolyMatrix(2, std::vector<Poly>(3)), DimensionMismatch);
  CHECK_THROWS_AS(matmul(PolyMatrix::identity(2), PolyMatrix::identity(3)), DimensionMismatch);
}

TEST_CASE("degree guard") {
  int saved = max_degree();
  set_max_degree(4);
  PolyMatrix a = poly_matrix(1, {{0, 0, 1}});
  CHECK_NOTHROW(matmul(a, a));
  CHECK_THROWS_AS(matmul(matmul(a, a), a), DegreeOverflow);
  CHECK_THROWS_AS(set_max_degree(-1), InputError);
  set_max_degree(saved);
  CHECK(max_degree() == saved);
}

TEST_CASE("piecewise matrices") {
  PolyMatrix lo = poly_matrix(1, {{1}});
  PolyMatrix hi = poly_matrix(1, {{0, 2}});
  PiecewisePolyMatrix p({0, 1, 3}, {lo, hi});
  CHECK(p.segment_count() == 2);
  CHECK(p.segment_index(Rational(1, 2)) == 0);
  CHECK(p.segment_index(Rational(1)) == 1);
  CHECK(p.segment_index(3.0) == 1);
  CHECK_THROWS_AS(p.segment_index(3.5), DomainError);
  CHECK_THROWS_AS(PiecewisePolyMatrix({0, 1}, {lo, hi}), InputError);
  CHECK_THROWS_AS(PiecewisePolyMatrix({1, 0}, {lo}), InputError);

  // Antiderivative is continuous across the breakpoint and starts at zero.
  PiecewisePolyMatrix ip = antiderivative(p);
  CHECK(evaluate(ip, Rational(0)) == std::vector<Rational>{0});
  CHECK(evaluate(ip, Rational(1)) == std::vector<Rational>{1});
  CHECK(evaluate(ip, Rational(3)) == std::vector<Rational>{9});
  CHECK(derivative(ip) == p);

  DenseEvaluator dense(ip);
  CHECK(dense(2.0)(0, 0) == doctest::Approx(4.0));
  CHECK(dense.on_segment(0, 1.0)(0, 0) == doctest::Approx(1.0));

  PiecewisePolyMatrix q = PiecewisePolyMatrix::single(lo, 0, 3);
  CHECK_THROWS_AS(p + q, InputError);
}

TEST_CASE("model text round-trips exactly") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    PiecewisePolyMatrix a = random_model(rng, 2 + trial % 3, trial % 4, Rational(3, 2));
    CHECK(parse_model(format_model(a)) == a);
  }
  PolyMatrix s1 = poly_matrix(2, {{2}, {0, 1}, {}, {-1}});
  PolyMatrix s2 = poly_matrix(2, {{Rational(1, 3)}, {}, {0, 0, -1}, {4}});
  PiecewisePolyMatrix two({0, Rational(1, 2), 2}, {s1, s2});
  CHECK(parse_model(format_model(two)) == two);
}

TEST_CASE("model parser accepts comments and decimals") {
  const char* text =
      "# a model\n"
      "dim 2\n"
      "breakpoints 0 1\n"
      "segment\n"
      "[2] [0 0.5]   # row one\n"
      "[] [-1]\n";
  PiecewisePolyMatrix a = parse_model(text);
  CHECK(a.dim() == 2);
  CHECK(a.segments()[0].entry(0, 1) == Poly({0, Rational(1, 2)}));
  CHECK(a.t_end() == Rational(1));
}

TEST_CASE("model parser rejects malformed input") {
  CHECK_THROWS_AS(parse_model("dim 2\nbreakpoints 0 1\nsegment\n[1] [2]\n"), ParseError);
  CHECK_THROWS_AS(parse_model("dim 2\nbreakpoints 0 1\nsegment\n[1] [2] [3]\n[] []\n"), ParseError);
  CHECK_THROWS_AS(parse_model("dim 1\nbreakpoints 1 0\nsegment\n[1]\n"), InputError);
  CHECK_THROWS_AS(parse_model("dim 1\nbreakpoints 0 1\nsegment\n[x]\n"), ParseError);
  CHECK_THROWS_AS(parse_model(""), ParseError);
  CHECK_THROWS_AS(read_model_file("/nonexistent/model.txt"), InputError);
}

TEST_CASE("constant matrix literal") {
  std::size_t dim = 0;
  auto v = parse_constant_matrix("1/10, 1/5; 0, -0.1", dim);
  CHECK(dim == 2);
  CHECK(v == std::vector<Rational>{Rational(1, 10), Rational(1, 5), 0, Rational(-1, 10)});
  CHECK_THROWS_AS(parse_constant_matrix("1,2;3", dim), InputError);
}
