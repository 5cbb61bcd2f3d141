#pragma once

#include <random>
#include <vector>

#include "magnus/polymat.hpp"

namespace magnus::testing {

inline Rational random_rational(std::mt19937& rng, int num_max = 3, int den_max = 4) {
  std::uniform_int_distribution<int> num(-num_max, num_max);
  std::uniform_int_distribution<int> den(1, den_max);
  Rational r(num(rng), den(rng));
  r.canonicalize();
  return r;
}

inline std::vector<Rational> random_constant(std::mt19937& rng, std::size_t dim, int num_max = 3, int den_max = 4) {
  std::vector<Rational> v(dim * dim);
  for (auto& x : v) x = random_rational(rng, num_max, den_max);
  return v;
}

inline std::vector<Rational> random_integer_matrix(std::mt19937& rng, std::size_t dim, int bound = 5) {
  return random_constant(rng, dim, bound, 1);
}

inline PolyMatrix random_poly_matrix(std::mt19937& rng, std::size_t dim, int degree) {
  std::vector<Poly> entries;
  for (std::size_t k = 0; k < dim * dim; ++k) {
    std::vector<Rational> c(static_cast<std::size_t>(degree) + 1);
    for (auto& x : c) x = random_rational(rng);
    entries.emplace_back(c);
  }
  return PolyMatrix(dim, entries);
}

/// Single segment on [0, t_end].
inline PiecewisePolyMatrix random_model(std::mt19937& rng, std::size_t dim, int degree, const Rational& t_end = 1) {
  return PiecewisePolyMatrix::single(random_poly_matrix(rng, dim, degree), 0, t_end);
}

/// Builds a PolyMatrix from row-major ascending coefficient lists.
inline PolyMatrix poly_matrix(std::size_t dim, const std::vector<std::vector<Rational>>& entries) {
  std::vector<Poly> polys;
  for (const auto& c : entries) polys.emplace_back(c);
  return PolyMatrix(dim, polys);
}

/// Constant matrix as a PolyMatrix, for exact bracket arithmetic.
inline PolyMatrix constant_matrix(std::size_t dim, const std::vector<Rational>& v) {
  return PolyMatrix::constant(dim, v);
}

/// Row-major exact value of a piecewise matrix at t.
inline std::vector<Rational> exact_at(const PiecewisePolyMatrix& a, const Rational& t) { return evaluate(a, t); }

/// Omega_1 and Omega_2 of the 4x4 polynomial example as printed.
inline PolyMatrix printed_ex4_omega1() {
  using R = Rational;
  return poly_matrix(4, {{0, 0, R(-1, 2)}, {0, 0, R(3, 2)}, {}, {0, 2, R(1, 2), -1},
                         {0, 0, R(-1, 2), R(1, 3)}, {0, -3}, {0, 3, 1, R(1, 3)}, {},
                         {0, 3}, {}, {0, 0, -1, R(1, 3)}, {0, -3, 0, R(-1, 3)},
                         {0, 3, R(-1, 2), R(1, 3)}, {0, 0, R(-3, 2), R(2, 3)}, {0, -2, R(-3, 2)}, {0, 2, R(-1, 2)}});
}

inline PolyMatrix printed_ex4_omega2() {
  using R = Rational;
  auto c = [](R c3, R c4, R c5) { return std::vector<Rational>{0, 0, 0, c3, c4, c5}; };
  return poly_matrix(4, {c(R(5, 12), R(-11, 12), R(-1, 60)), c(R(-1, 4), R(-1, 3), R(7, 60)),
                         c(R(13, 12), R(1, 2), R(1, 10)), c(R(1, 6), R(-1, 2), 0),
                         c(R(1, 4), R(1, 2), R(-1, 60)), c(0, 0, R(1, 20)), c(1, 0, R(-1, 15)),
                         c(R(-2, 3), R(1, 6), 0),
                         c(R(-1, 2), R(1, 4), R(1, 60)), c(R(-3, 2), R(1, 2), R(1, 20)),
                         c(R(-3, 4), R(1, 6), R(1, 20)), c(0, R(1, 3), R(-1, 60)),
                         c(R(-7, 12), R(-1, 6), R(1, 60)), c(R(1, 2), R(-5, 6), R(1, 12)),
                         c(R(-5, 12), R(2, 3), R(1, 6)), c(R(1, 3), R(3, 4), R(-1, 12))});
}

/// Omega_1 .. Omega_4 of the 2x2 upper-triangular example as printed.
inline std::vector<PolyMatrix> printed_ex3_terms() {
  using R = Rational;
  return {poly_matrix(2, {{0, 2}, {0, 0, R(1, 2)}, {}, {0, -1}}),
          poly_matrix(2, {{}, {0, 0, 0, R(-1, 4)}, {}, {}}),
          poly_matrix(2, {{}, {}, {}, {}}),
          poly_matrix(2, {{}, {0, 0, 0, 0, 0, R(1, 80)}, {}, {}})};
}

}  // namespace magnus::testing
