#include "magnus/corpus.hpp"

#include <cmath>

#include "magnus/error.hpp"
#include "magnus/model_io.hpp"
#include "magnus/series.hpp"

namespace magnus {

namespace {

PiecewisePolyMatrix poly_model(std::size_t dim, const std::vector<std::vector<Rational>>& entries, const Rational& t_end) {
  std::vector<Poly> polys;
  polys.reserve(entries.size());
  for (const auto& c : entries) polys.emplace_back(c);
  return PiecewisePolyMatrix::single(PolyMatrix(dim, polys), 0, t_end);
}

Example from_model(std::string name, std::string summary, PiecewisePolyMatrix a) {
  Example e{std::move(name), std::move(summary), format_model(a), MatrixFunction::from_polynomial(a), a, {}};
  return e;
}

Example example1() {
  auto e = from_model("ex1", "constant rotation generator; non-defective collision at -1 when t = pi",
                      poly_model(2, {{0}, {1}, {-1}, {0}}, 7));
  e.exact_solution = [](double t) {
    RealMatrix y(2, 2);
    y << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
    return y;
  };
  return e;
}

Example example2() {
  auto a = [](double t) {
    RealMatrix m(2, 2);
    m << std::sin(2 * t), -1 - std::cos(2 * t), 1 - std::cos(2 * t), -std::sin(2 * t);
    return RealMatrix(0.5 * m);
  };
  Example e{"ex2",
            "trigonometric A with ||A||_2 = 1; Y(pi) has no real logarithm (numeric only)",
            "A(t) = 1/2 [[sin 2t, -1 - cos 2t], [1 - cos 2t, -sin 2t]] on [0, 4]",
            MatrixFunction::smooth(2, 0, 4, a),
            std::nullopt,
            {}};
  e.exact_solution = [](double t) {
    RealMatrix y(2, 2);
    y << t * std::sin(t) + std::cos(t), -std::sin(t), std::sin(t) - t * std::cos(t), std::cos(t);
    return y;
  };
  return e;
}

Example example3() {
  auto e = from_model("ex3", "upper triangular A; series diverges at 2 pi / 3 although log Y is real",
                      poly_model(2, {{2}, {0, 1}, {}, {-1}}, 4));
  e.exact_solution = [](double t) {
    RealMatrix y(2, 2);
    y << std::exp(2 * t), std::exp(2 * t) / 9 - (1.0 / 9 + t / 3) * std::exp(-t), 0, std::exp(-t);
    return y;
  };
  return e;
}

Example example4() {
  // Row-major coefficient lists, ascending powers of t.
  return from_model("ex4", "4x4 polynomial A; conjectured divergence onset near t = 0.733",
                    poly_model(4,
                               {{0, -1}, {0, 3}, {}, {2, 1, -3},
                                {0, -1, 1}, {-3}, {3, 2, 1}, {},
                                {3}, {}, {0, -2, 1}, {-3, 0, -1},
                                {3, -1, 1}, {0, -3, 2}, {-2, -3}, {2, -1}},
                               2));
}

}  // namespace

const std::vector<std::string>& example_names() {
  static const std::vector<std::string> names{"ex1", "ex2", "ex3", "ex4", "bch"};
  return names;
}

Example bch_example(std::size_t dim, const std::vector<Rational>& a1, const std::vector<Rational>& a2) {
  const auto a = bch_generator(dim, a1, a2);
  auto e = from_model("bch", "piecewise constant A: A2 on [0,1), A1 on [1,2]; Y(2) = exp(A1) exp(A2)", a);
  const PolyMatrix m1 = PolyMatrix::constant(dim, a1);
  const PolyMatrix m2 = PolyMatrix::constant(dim, a2);
  const ComplexMatrix e2 = expm(to_complex(m2.evaluate(0.0)));
  const RealMatrix a1f = m1.evaluate(0.0);
  const RealMatrix a2f = m2.evaluate(0.0);
  e.exact_solution = [a1f, a2f, e2](double t) -> RealMatrix {
    if (t <= 1) return expm(to_complex(RealMatrix(t * a2f))).real();
    return (expm(to_complex(RealMatrix((t - 1) * a1f))) * e2).real();
  };
  return e;
}

Example example(const std::string& name) {
  if (name == "ex1") return example1();
  if (name == "ex2") return example2();
  if (name == "ex3") return example3();
  if (name == "ex4") return example4();
  if (name == "bch") {
    return bch_example(2, {Rational(1, 10), Rational(1, 5), 0, Rational(-1, 10)},
                       {0, Rational(1, 10), Rational(1, 5), 0});
  }
  throw InputError("unknown example '" + name + "' (known: ex1, ex2, ex3, ex4, bch)");
}

}  // namespace magnus
