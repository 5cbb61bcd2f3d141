#pragma once

// Fundamental solutions of Y' = kappa A(t) Y and the action integral
// gamma(t) = int_0^t ||A||_2.

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "magnus/linalg.hpp"
#include "magnus/polymat.hpp"

namespace magnus {

/// A(t) on [t_begin, t_end], smooth between breakpoints. The evaluator is
/// told which piece is active so steps ending exactly on a breakpoint use
/// the left piece.
class MatrixFunction {
 public:
  using PieceEvaluator = std::function<RealMatrix(std::size_t piece, double t)>;

  MatrixFunction() = default;
  /// breakpoints includes both ends.
  MatrixFunction(std::size_t dim, std::vector<double> breakpoints, PieceEvaluator eval);

  static MatrixFunction smooth(std::size_t dim, double t_begin, double t_end, std::function<RealMatrix(double)> f);
  static MatrixFunction from_polynomial(const PiecewisePolyMatrix& a);

  std::size_t dim() const noexcept { return dim_; }
  double t_begin() const noexcept { return breaks_.front(); }
  double t_end() const noexcept { return breaks_.back(); }
  const std::vector<double>& breakpoints() const noexcept { return breaks_; }
  std::size_t piece_count() const noexcept { return breaks_.size() - 1; }
  std::size_t piece_index(double t) const;

  RealMatrix operator()(double t) const { return eval_(piece_index(t), t); }
  RealMatrix on_piece(std::size_t k, double t) const { return eval_(k, t); }

 private:
  std::size_t dim_ = 0;
  std::vector<double> breaks_;
  PieceEvaluator eval_;
};

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  /// Largest normalized local error estimate among accepted steps (<= 1).
  double max_error = 0.0;
};

struct FundamentalSolution {
  Complex kappa;
  std::vector<double> grid;
  std::vector<ComplexMatrix> values;
  StepStats stats;
};

inline constexpr double kDefaultOdeTol = 1e-10;

/// Dormand-Prince 5(4) with per-step error control; the state starts at
/// Y0 at grid.front() and is reported at every grid time. Steps never cross
/// a breakpoint of A.
FundamentalSolution propagate(const MatrixFunction& a, Complex kappa, const ComplexMatrix& y0,
                              const std::vector<double>& grid, double tol = kDefaultOdeTol);

/// Y(t; kappa) from Y(t_begin) = I, sampled on grid (grid.front() must be
/// the start of the domain).
FundamentalSolution fundamental_solution(const MatrixFunction& a, Complex kappa, const std::vector<double>& grid,
                                         double tol = kDefaultOdeTol);
/// Grid {t_begin, t_end}.
FundamentalSolution fundamental_solution(const MatrixFunction& a, Complex kappa, double t_end,
                                         double tol = kDefaultOdeTol);

/// Y(t_end; kappa) only.
ComplexMatrix solve_at(const MatrixFunction& a, Complex kappa, double t_end, double tol = kDefaultOdeTol);

/// gamma(t) = int_{t_begin}^t ||A(tau)||_2 dtau by adaptive Gauss-Kronrod on
/// each smooth piece.
double action_norm(const MatrixFunction& a, double t, double tol = 1e-10);

/// Length of the path traced by y/|y| for y' = A y, y(t_begin) = y0.
double unit_direction_arclength(const MatrixFunction& a, const Eigen::VectorXd& y0, double t,
                                double tol = kDefaultOdeTol);

}  // namespace magnus
