#include "magnus/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "magnus/error.hpp"

namespace magnus {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) throw DimensionMismatch(std::string(what) + ": matrix must be square");
  if (m.rows() > kMaxDim) throw DimensionMismatch(std::string(what) + ": dimension above 16 is not supported");
  if (!m.allFinite()) throw NumericError(std::string(what) + ": non-finite entries");
}

double norm1(const ComplexMatrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

// ------------------------------------------------------------- QR core

// Unitary G = [[c, s], [-conj(s), c]] with G [a; b] = [r; 0].
struct Givens {
  double c;
  Complex s;
};

Givens make_givens(Complex a, Complex b) {
  const double abs_a = std::abs(a);
  const double abs_b = std::abs(b);
  if (abs_b == 0.0) return {1.0, 0.0};
  if (abs_a == 0.0) return {0.0, 1.0};
  const double r = std::hypot(abs_a, abs_b);
  return {abs_a / r, (a / abs_a) * std::conj(b) / r};
}

void to_hessenberg(ComplexMatrix& h) {
  const Eigen::Index n = h.rows();
  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    ComplexVector x = h.block(k + 1, k, n - k - 1, 1);
    const double alpha = x.norm();
    if (alpha == 0.0) continue;
    const Complex phase = std::abs(x(0)) == 0.0 ? Complex(1.0) : x(0) / std::abs(x(0));
    ComplexVector v = x;
    v(0) += phase * alpha;
    const double vnorm = v.norm();
    if (vnorm == 0.0) continue;
    v /= vnorm;
    // H <- P H P with P = I - 2 v v*.
    h.block(k + 1, 0, n - k - 1, n) -= 2.0 * v * (v.adjoint() * h.block(k + 1, 0, n - k - 1, n));
    h.block(0, k + 1, n, n - k - 1) -= 2.0 * (h.block(0, k + 1, n, n - k - 1) * v) * v.adjoint();
    for (Eigen::Index i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }
}

Complex wilkinson_shift(const ComplexMatrix& h, Eigen::Index hi) {
  const Complex a = h(hi - 1, hi - 1);
  const Complex b = h(hi - 1, hi);
  const Complex c = h(hi, hi - 1);
  const Complex d = h(hi, hi);
  const Complex half = 0.5 * (a - d);
  const Complex disc = std::sqrt(half * half + b * c);
  const Complex m1 = 0.5 * (a + d) + disc;
  const Complex m2 = 0.5 * (a + d) - disc;
  return std::abs(m1 - d) < std::abs(m2 - d) ? m1 : m2;
}

std::vector<Complex> hessenberg_qr(ComplexMatrix h) {
  const Eigen::Index n = h.rows();
  std::vector<Complex> values(static_cast<std::size_t>(n));
  const double scale = std::max(norm1(h), std::numeric_limits<double>::min());
  const long cap = 100L * n * n;
  long iterations = 0;
  int stagnant = 0;
  Eigen::Index hi = n - 1;
  std::vector<Givens> rot(static_cast<std::size_t>(n));

  while (hi >= 0) {
    // Find the start of the unreduced block ending at hi.
    Eigen::Index lo = hi;
    while (lo > 0) {
      double ref = std::abs(h(lo, lo)) + std::abs(h(lo - 1, lo - 1));
      if (ref == 0.0) ref = scale;
      if (std::abs(h(lo, lo - 1)) <= kEps * ref) {
        h(lo, lo - 1) = 0.0;
        break;
      }
      --lo;
    }
    if (lo == hi) {
      values[static_cast<std::size_t>(hi)] = h(hi, hi);
      --hi;
      stagnant = 0;
      continue;
    }
    if (++iterations > cap) throw NoConvergence("eig: QR iteration did not converge");

    Complex mu;
    if (++stagnant % 11 == 10) {
      // Exceptional shift to break cycles.
      mu = h(hi, hi) + Complex(0.75 * std::abs(h(hi, hi - 1)), 0.4 * std::abs(h(hi, hi - 1)));
    } else {
      mu = wilkinson_shift(h, hi);
    }

    for (Eigen::Index k = lo; k <= hi; ++k) h(k, k) -= mu;
    for (Eigen::Index k = lo; k < hi; ++k) {
      const Givens g = make_givens(h(k, k), h(k + 1, k));
      rot[static_cast<std::size_t>(k)] = g;
      for (Eigen::Index j = k; j <= hi; ++j) {
        const Complex x = h(k, j);
        const Complex y = h(k + 1, j);
        h(k, j) = g.c * x + g.s * y;
        h(k + 1, j) = -std::conj(g.s) * x + g.c * y;
      }
    }
    for (Eigen::Index k = lo; k < hi; ++k) {
      const Givens& g = rot[static_cast<std::size_t>(k)];
      const Eigen::Index last = std::min(k + 2, hi);
      for (Eigen::Index i = lo; i <= last; ++i) {
        const Complex x = h(i, k);
        const Complex y = h(i, k + 1);
        h(i, k) = x * g.c + y * std::conj(g.s);
        h(i, k + 1) = -x * g.s + y * g.c;
      }
    }
    for (Eigen::Index k = lo; k <= hi; ++k) h(k, k) += mu;
  }
  return values;
}

// Pairs each eigenvalue with its nearest conjugate partner and symmetrizes.
void enforce_conjugate_closure(std::vector<Complex>& values) {
  const std::size_t n = values.size();
  std::vector<bool> used(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (used[i]) continue;
    std::size_t best = i;
    double best_dist = std::abs(values[i] - std::conj(values[i]));
    for (std::size_t j = i + 1; j < n; ++j) {
      if (used[j]) continue;
      const double d = std::abs(values[i] - std::conj(values[j]));
      if (d < best_dist) {
        best_dist = d;
        best = j;
      }
    }
    used[i] = true;
    if (best == i) {
      values[i] = values[i].real();
    } else {
      used[best] = true;
      const Complex avg = 0.5 * (values[i] + std::conj(values[best]));
      values[i] = avg;
      values[best] = std::conj(avg);
    }
  }
}

// --------------------------------------------------- Gauss-Legendre

constexpr int kGaussPoints = 10;

struct GaussRule {
  std::array<double, kGaussPoints> nodes{};    // on [0, 1]
  std::array<double, kGaussPoints> weights{};  // sum to 1
};

GaussRule make_gauss_rule() {
  GaussRule rule;
  const int n = kGaussPoints;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (1.0 + x);
    rule.weights[static_cast<std::size_t>(i)] = 0.5 * w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = 0.5 * w;
  }
  return rule;
}

const GaussRule& gauss_rule() {
  static const GaussRule rule = make_gauss_rule();
  return rule;
}

class ResolventIntegral {
 public:
  ResolventIntegral(const ComplexMatrix& phi, double tol)
      : phi_(phi), id_(ComplexMatrix::Identity(phi.rows(), phi.cols())), tol_(tol) {}

  ComplexMatrix integrate() {
    // Start from a uniform partition so narrow features are not missed.
    constexpr int kInitialPanels = 8;
    ComplexMatrix total = ComplexMatrix::Zero(phi_.rows(), phi_.cols());
    for (int p = 0; p < kInitialPanels; ++p) {
      const double a = static_cast<double>(p) / kInitialPanels;
      const double b = static_cast<double>(p + 1) / kInitialPanels;
      total += refine(a, b, panel(a, b), 0, std::numeric_limits<double>::infinity());
    }
    return total;
  }

 private:
  ComplexMatrix integrand(double s) const {
    const ComplexMatrix shifted = s * id_ + (1.0 - s) * phi_;
    return shifted.partialPivLu().inverse();
  }

  ComplexMatrix panel(double a, double b) const {
    const GaussRule& rule = gauss_rule();
    ComplexMatrix acc = ComplexMatrix::Zero(phi_.rows(), phi_.cols());
    for (int i = 0; i < kGaussPoints; ++i) {
      acc += rule.weights[static_cast<std::size_t>(i)] * integrand(a + (b - a) * rule.nodes[static_cast<std::size_t>(i)]);
    }
    return (b - a) * acc;
  }

  ComplexMatrix refine(double a, double b, const ComplexMatrix& whole, int depth, double parent_diff) {
    const double mid = 0.5 * (a + b);
    const ComplexMatrix left = panel(a, mid);
    const ComplexMatrix right = panel(mid, b);
    const ComplexMatrix halves = left + right;
    const double diff = norm1(halves - whole);
    const double size = std::max(1.0, norm1(halves));
    // Halving a resolved panel shrinks the difference by orders of magnitude;
    // when it stalls, the estimate is roundoff from the shifted inverses.
    const double mass = norm1(left) + norm1(right);
    const bool stalled = depth >= 2 && diff > parent_diff / 8 && diff <= 1e-6 * mass;
    const double floor = 64 * kEps * mass;
    if (diff <= tol_ * size * (b - a) || diff <= floor || stalled || depth >= 40) return halves;
    return refine(a, mid, left, depth + 1, diff) + refine(mid, b, right, depth + 1, diff);
  }

  const ComplexMatrix& phi_;
  ComplexMatrix id_;
  double tol_;
};

void require_off_cut(const std::vector<Complex>& values, const char* what) {
  for (const Complex& z : values) {
    if (on_negative_axis(z)) {
      throw NegativeSpectrum(std::string(what) + ": eigenvalue (" + std::to_string(z.real()) + ", " +
                             std::to_string(z.imag()) + ") lies on the closed negative real axis");
    }
  }
}

double eigenbasis_condition(const std::vector<ComplexVector>& vectors) {
  const auto n = static_cast<Eigen::Index>(vectors.size());
  ComplexMatrix v(n, n);
  for (Eigen::Index j = 0; j < n; ++j) v.col(j) = vectors[static_cast<std::size_t>(j)];
  Eigen::JacobiSVD<ComplexMatrix> svd(v);
  const auto& sv = svd.singularValues();
  const double smin = sv(n - 1);
  if (smin <= sv(0) * kEps) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

}  // namespace

bool on_negative_axis(Complex z, double tol) {
  return std::abs(z.imag()) <= tol * (1.0 + std::abs(z)) && z.real() <= tol;
}

ComplexMatrix expm(const ComplexMatrix& m) {
  check_square(m, "expm");
  static constexpr std::array<double, 14> b = {64764752532480000.0,
                                               32382376266240000.0,
                                               7771770303897600.0,
                                               1187353796428800.0,
                                               129060195264000.0,
                                               10559470521600.0,
                                               670442572800.0,
                                               33522128640.0,
                                               1323241920.0,
                                               40840800.0,
                                               960960.0,
                                               16380.0,
                                               182.0,
                                               1.0};
  constexpr double theta13 = 5.371920351148152;
  const Eigen::Index n = m.rows();
  const double norm = norm1(m);
  int squarings = 0;
  if (norm > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
  if (squarings > 1000) throw NumericError("expm: argument norm too large");
  const ComplexMatrix a = m / std::ldexp(1.0, squarings);

  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  const ComplexMatrix a2 = a * a;
  const ComplexMatrix a4 = a2 * a2;
  const ComplexMatrix a6 = a4 * a2;
  const ComplexMatrix u =
      a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  const ComplexMatrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  ComplexMatrix r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) r = r * r;
  if (!r.allFinite()) throw NumericError("expm: overflow");
  return r;
}

ComplexMatrix logm_integral(const ComplexMatrix& phi, double tol) {
  check_square(phi, "logm_integral");
  require_off_cut(eigenvalues(phi), "logm_integral");
  ResolventIntegral integral(phi, tol);
  const ComplexMatrix id = ComplexMatrix::Identity(phi.rows(), phi.cols());
  return (phi - id) * integral.integrate();
}

ComplexMatrix logm_eig(const ComplexMatrix& phi, double max_condition) {
  check_square(phi, "logm_eig");
  const std::vector<Complex> values = eigenvalues(phi);
  require_off_cut(values, "logm_eig");
  const auto vectors = eigenvectors(phi, values);
  const double cond = eigenbasis_condition(vectors);
  if (!(cond <= max_condition)) {
    throw IllConditioned("logm_eig: eigenbasis condition " + std::to_string(cond) + " exceeds limit");
  }
  const Eigen::Index n = phi.rows();
  ComplexMatrix v(n, n);
  ComplexMatrix log_d = ComplexMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    v.col(j) = vectors[static_cast<std::size_t>(j)];
    log_d(j, j) = std::log(values[static_cast<std::size_t>(j)]);
  }
  return v * log_d * v.partialPivLu().inverse();
}

std::vector<Complex> eigenvalues(const ComplexMatrix& m) {
  check_square(m, "eig");
  ComplexMatrix h = m;
  to_hessenberg(h);
  std::vector<Complex> values = hessenberg_qr(std::move(h));
  if (m.imag().isZero(0.0)) enforce_conjugate_closure(values);
  return values;
}

std::vector<ComplexVector> eigenvectors(const ComplexMatrix& m, const std::vector<Complex>& values) {
  const Eigen::Index n = m.rows();
  const double scale = std::max(spectral_norm(m), std::numeric_limits<double>::min());
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  std::vector<ComplexVector> out;
  out.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    // Perturb the shift slightly so the shifted matrix stays invertible.
    const Complex shift = values[k] + Complex(1.0, 0.5) * (1e3 * kEps * scale);
    const auto lu = (m - shift * id).partialPivLu();
    ComplexVector x = ComplexVector::Ones(n) / std::sqrt(static_cast<double>(n));
    x(static_cast<Eigen::Index>(k % static_cast<std::size_t>(n))) += 0.5;
    x.normalize();
    for (int it = 0; it < 3; ++it) {
      ComplexVector y = lu.solve(x);
      const double yn = y.norm();
      if (!(yn > 0.0) || !std::isfinite(yn)) break;
      x = y / yn;
    }
    out.push_back(x);
  }
  return out;
}

Spectrum eig(const ComplexMatrix& m) {
  Spectrum s;
  s.eigenvalues = eigenvalues(m);
  s.condition_estimate = eigenbasis_condition(eigenvectors(m, s.eigenvalues));
  return s;
}

Spectrum eig(const RealMatrix& m) { return eig(to_complex(m)); }

double spectral_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  const ComplexMatrix gram = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

double spectral_norm(const RealMatrix& m) {
  if (m.size() == 0) return 0.0;
  const RealMatrix gram = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

int numerical_rank(const ComplexMatrix& m, double threshold) {
  ComplexMatrix a = m;
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  int rank = 0;
  for (Eigen::Index k = 0; k < std::min(rows, cols); ++k) {
    Eigen::Index pr = k;
    Eigen::Index pc = k;
    double best = -1.0;
    for (Eigen::Index i = k; i < rows; ++i) {
      for (Eigen::Index j = k; j < cols; ++j) {
        if (std::abs(a(i, j)) > best) {
          best = std::abs(a(i, j));
          pr = i;
          pc = j;
        }
      }
    }
    if (best <= threshold) break;
    a.row(k).swap(a.row(pr));
    a.col(k).swap(a.col(pc));
    for (Eigen::Index i = k + 1; i < rows; ++i) {
      const Complex f = a(i, k) / a(k, k);
      a.row(i).tail(cols - k) -= f * a.row(k).tail(cols - k);
    }
    ++rank;
  }
  return rank;
}

int geometric_multiplicity(const ComplexMatrix& m, Complex lambda, double tol) {
  check_square(m, "geometric_multiplicity");
  const ComplexMatrix shifted = m - lambda * ComplexMatrix::Identity(m.rows(), m.cols());
  return static_cast<int>(m.rows()) - numerical_rank(shifted, tol * spectral_norm(m));
}

}  // namespace magnus
