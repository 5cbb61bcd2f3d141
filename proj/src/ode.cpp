#include "magnus/ode.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <memory>

#include "dopri.hpp"
#include "magnus/error.hpp"

namespace magnus {

MatrixFunction::MatrixFunction(std::size_t dim, std::vector<double> breakpoints, PieceEvaluator eval)
    : dim_(dim), breaks_(std::move(breakpoints)), eval_(std::move(eval)) {
  if (dim_ == 0 || static_cast<Eigen::Index>(dim_) > kMaxDim) throw DimensionMismatch("matrix function dimension out of range");
  if (breaks_.size() < 2) throw InputError("matrix function needs at least one piece");
  for (std::size_t k = 1; k < breaks_.size(); ++k) {
    if (!(breaks_[k] > breaks_[k - 1])) throw InputError("breakpoints must be strictly increasing");
  }
}

MatrixFunction MatrixFunction::smooth(std::size_t dim, double t_begin, double t_end, std::function<RealMatrix(double)> f) {
  return MatrixFunction(dim, {t_begin, t_end}, [f = std::move(f)](std::size_t, double t) { return f(t); });
}

MatrixFunction MatrixFunction::from_polynomial(const PiecewisePolyMatrix& a) {
  auto eval = std::make_shared<const DenseEvaluator>(a);
  return MatrixFunction(a.dim(), eval->breakpoints(), [eval](std::size_t k, double t) { return eval->on_segment(k, t); });
}

std::size_t MatrixFunction::piece_index(double t) const {
  if (t < t_begin() || t > t_end() || std::isnan(t)) {
    throw DomainError("t = " + std::to_string(t) + " outside [" + std::to_string(t_begin()) + ", " +
                      std::to_string(t_end()) + "]");
  }
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  const auto k = static_cast<std::size_t>(it - breaks_.begin());
  return std::min(k == 0 ? 0 : k - 1, piece_count() - 1);
}

namespace {

// Stop times from a to b: b itself plus every interior breakpoint.
std::vector<double> stops_between(const MatrixFunction& a, double from, double to) {
  std::vector<double> stops;
  for (double b : a.breakpoints()) {
    if (b > from && b < to) stops.push_back(b);
  }
  stops.push_back(to);
  return stops;
}

}  // namespace

FundamentalSolution propagate(const MatrixFunction& a, Complex kappa, const ComplexMatrix& y0,
                              const std::vector<double>& grid, double tol) {
  if (!(tol > 0)) throw InputError("tolerance must be positive");
  if (grid.empty()) throw InputError("empty sample grid");
  const auto d = static_cast<Eigen::Index>(a.dim());
  if (y0.rows() != d || y0.cols() != d) throw DimensionMismatch("initial value dimension differs from A");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    a.piece_index(grid[k]);  // domain check
    if (k > 0 && grid[k] < grid[k - 1]) throw InputError("sample grid must be nondecreasing");
  }

  FundamentalSolution out{kappa, grid, {}, {}};
  out.values.reserve(grid.size());
  ComplexMatrix y = y0;
  out.values.push_back(y);
  if (kappa == Complex(0)) {
    for (std::size_t k = 1; k < grid.size(); ++k) out.values.push_back(y);
    return out;
  }

  const detail::Dopri5<ComplexMatrix> stepper(tol);
  double h = 0;
  double t = grid.front();
  for (std::size_t k = 1; k < grid.size(); ++k) {
    for (double stop : stops_between(a, t, grid[k])) {
      const std::size_t piece = a.piece_index(0.5 * (t + stop));
      auto rhs = [&](double s, const ComplexMatrix& m) -> ComplexMatrix {
        return kappa * (a.on_piece(piece, s).cast<Complex>() * m);
      };
      stepper.advance(rhs, t, stop, y, h, out.stats);
      t = stop;
    }
    out.values.push_back(y);
  }
  return out;
}

FundamentalSolution fundamental_solution(const MatrixFunction& a, Complex kappa, const std::vector<double>& grid,
                                         double tol) {
  if (grid.empty() || grid.front() != a.t_begin()) throw InputError("sample grid must start at the domain start");
  const auto d = static_cast<Eigen::Index>(a.dim());
  return propagate(a, kappa, ComplexMatrix::Identity(d, d), grid, tol);
}

FundamentalSolution fundamental_solution(const MatrixFunction& a, Complex kappa, double t_end, double tol) {
  return fundamental_solution(a, kappa, std::vector<double>{a.t_begin(), t_end}, tol);
}

ComplexMatrix solve_at(const MatrixFunction& a, Complex kappa, double t_end, double tol) {
  return fundamental_solution(a, kappa, t_end, tol).values.back();
}

double action_norm(const MatrixFunction& a, double t, double tol) {
  if (!(tol > 0)) throw InputError("tolerance must be positive");
  a.piece_index(t);
  using boost::math::quadrature::gauss_kronrod;
  double total = 0;
  double from = a.t_begin();
  for (double stop : stops_between(a, from, t)) {
    if (stop <= from) break;
    const std::size_t piece = a.piece_index(0.5 * (from + stop));
    auto f = [&](double s) { return spectral_norm(a.on_piece(piece, s)); };
    // Gauss-Kronrod tolerance is relative; tighten it when the piece is large.
    double l1 = 0;
    double value = gauss_kronrod<double, 15>::integrate(f, from, stop, 20, tol, nullptr, &l1);
    if (l1 > 1) value = gauss_kronrod<double, 15>::integrate(f, from, stop, 20, tol / l1);
    total += value;
    from = stop;
  }
  return total;
}

double unit_direction_arclength(const MatrixFunction& a, const Eigen::VectorXd& y0, double t, double tol) {
  const auto d = static_cast<Eigen::Index>(a.dim());
  if (y0.size() != d) throw DimensionMismatch("initial vector dimension differs from A");
  if (y0.norm() == 0) throw InputError("initial vector must be nonzero");
  a.piece_index(t);

  // State (y, s): y' = A y and s' = |d/dt (y/|y|)| = |(I - u u^T) A u|.
  Eigen::VectorXd z(d + 1);
  z << y0 / y0.norm(), 0.0;
  const detail::Dopri5<Eigen::VectorXd> stepper(tol);
  StepStats stats;
  double h = 0;
  double from = a.t_begin();
  for (double stop : stops_between(a, from, t)) {
    if (stop <= from) break;
    const std::size_t piece = a.piece_index(0.5 * (from + stop));
    auto rhs = [&](double s, const Eigen::VectorXd& state) -> Eigen::VectorXd {
      const Eigen::VectorXd y = state.head(d);
      const double r = y.norm();
      if (r == 0) throw SingularMatrix("trajectory reached the origin");
      const Eigen::VectorXd u = y / r;
      const RealMatrix am = a.on_piece(piece, s);
      const Eigen::VectorXd au = am * u;
      Eigen::VectorXd out(d + 1);
      out << am * y, (au - u.dot(au) * u).norm();
      return out;
    };
    stepper.advance(rhs, from, stop, z, h, stats);
    from = stop;
  }
  return z(d);
}

}  // namespace magnus
