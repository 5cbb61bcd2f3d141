#pragma once

// Built-in example problems.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "magnus/ode.hpp"
#include "magnus/polymat.hpp"

namespace magnus {

struct Example {
  std::string name;
  std::string summary;
  /// Human-readable definition of A(t).
  std::string definition;
  MatrixFunction function;
  /// Exact coefficients when A is piecewise polynomial.
  std::optional<PiecewisePolyMatrix> polynomial;
  /// Closed-form Y(t), when known.
  std::function<RealMatrix(double)> exact_solution;

  bool numeric_only() const { return !polynomial.has_value(); }
};

/// "ex1", "ex2", "ex3", "ex4", "bch".
const std::vector<std::string>& example_names();

/// Throws InputError for an unknown name. "bch" uses the default pair
/// A1 = [[1/10, 1/5], [0, -1/10]], A2 = [[0, 1/10], [1/5, 0]].
Example example(const std::string& name);

Example bch_example(std::size_t dim, const std::vector<Rational>& a1, const std::vector<Rational>& a2);

}  // namespace magnus
