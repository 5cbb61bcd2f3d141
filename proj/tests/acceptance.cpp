// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "magnus/corpus.hpp"
#include "magnus/diagnostics.hpp"
#include "magnus/error.hpp"
#include "magnus/linalg.hpp"
#include "magnus/series.hpp"
#include "support.hpp"

using namespace magnus;
using namespace magnus::testing;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string term_text(const PolyMatrix& m) {
  std::string s;
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j)
      if (!m.entry(i, j).is_zero())
        s += "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")=" + format_poly(m.entry(i, j)) + " ";
  return s.empty() ? "0" : s;
}

const MagnusSeries& ex4_series() {
  static const MagnusSeries s = magnus_terms(*example("ex4").polynomial, 30);
  return s;
}

// 1. Generated Omega_1, Omega_2 of the 4x4 example equal the printed matrices.
void paper_matrices(Check& c) {
  MagnusSeries s = magnus_terms(*example("ex4").polynomial, 2);
  bool o1 = s.term(1).segments()[0] == printed_ex4_omega1();
  bool o2 = s.term(2).segments()[0] == printed_ex4_omega2();
  c.detail << "Omega_1 " << (o1 ? "equal" : "differs") << ", Omega_2 " << (o2 ? "equal" : "differs");
  c.require(o1, "Omega_1");
  c.require(o2, "Omega_2");
}

// 2. First four terms of the upper-triangular example equal the printed ones.
void triangular_terms(Check& c) {
  MagnusSeries s = magnus_terms(*example("ex3").polynomial, 4);
  auto printed = printed_ex3_terms();
  std::vector<int> differ;
  for (int n = 1; n <= 4; ++n) {
    const PolyMatrix& got = s.term(n).segments()[0];
    const PolyMatrix& want = printed[static_cast<std::size_t>(n - 1)];
    if (got == want) {
      c.detail << "Omega_" << n << " equal; ";
    } else {
      c.detail << "Omega_" << n << " computed " << term_text(got) << "printed " << term_text(want) << "; ";
      differ.push_back(n);
    }
  }
  bool oracle = s.term(4) == magnus_terms_oracle(*example("ex3").polynomial, 4);
  c.detail << "iterated-integral oracle " << (oracle ? "agrees with" : "disagrees with") << " the recursion";
  for (int n : differ) c.require(false, "Omega_" + std::to_string(n));
}

// 3. Recursion equals the iterated-integral oracle for n <= 4.
void oracle_equivalence(Check& c) {
  std::mt19937 rng(31415);
  int checked = 0, mismatched = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t dim = 2 + static_cast<std::size_t>(trial % 2);
    int degree = trial % 3;
    PiecewisePolyMatrix a = random_model(rng, dim, degree);
    MagnusSeries s = magnus_terms(a, 4);
    for (int n = 1; n <= 4; ++n) {
      ++checked;
      if (!(s.term(n) == magnus_terms_oracle(a, n))) ++mismatched;
    }
  }
  c.detail << checked << " term comparisons on 50 random systems, " << mismatched << " mismatches";
  c.require(mismatched == 0, "oracle mismatch");
}

// 4. BCH terms of orders 1-3 at t = 2.
void bch_identity(Check& c) {
  std::mt19937 rng(2718);
  int bad = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t dim = 2 + static_cast<std::size_t>(trial % 2);
    auto a1 = random_integer_matrix(rng, dim);
    auto a2 = random_integer_matrix(rng, dim);
    MagnusSeries b = bch_terms(dim, a1, a2, 3);
    PolyMatrix x = constant_matrix(dim, a1), y = constant_matrix(dim, a2);
    const Rational zero(0), two(2);
    bool ok = exact_at(b.term(1), two) == (x + y).evaluate(zero) &&
              exact_at(b.term(2), two) == scale(commutator(x, y), Rational(1, 2)).evaluate(zero) &&
              exact_at(b.term(3), two) ==
                  scale(commutator(x, commutator(x, y)) + commutator(y, commutator(y, x)), Rational(1, 12))
                      .evaluate(zero);
    if (!ok) ++bad;
  }
  c.detail << "20 random integer pairs, " << bad << " mismatches";
  c.require(bad == 0, "BCH terms");
}

// 5. Sharpness witness.
void sharpness(Check& c) {
  Example e2 = example("ex2");
  double gamma = action_norm(e2.function, M_PI);
  ComplexMatrix y = solve_at(e2.function, 1.0, M_PI, 1e-12);
  ComplexMatrix expect(2, 2);
  expect << -1, 0, M_PI, -1;
  double err = (y - expect).cwiseAbs().maxCoeff();
  RealLog verdict = real_log_exists(y).verdict;
  bool raised = false;
  try {
    logm_integral(y);
  } catch (const NegativeSpectrum&) {
    raised = true;
  }
  c.detail << "|gamma(pi) - pi| = " << std::abs(gamma - M_PI) << ", |Y(pi) - expected| = " << err
           << ", real log " << to_string(verdict) << ", logm_integral " << (raised ? "raised NegativeSpectrum" : "returned");
  c.require(std::abs(gamma - M_PI) <= 1e-6, "gamma(pi)");
  c.require(err <= 1e-6, "Y(pi)");
  c.require(verdict == RealLog::No, "real log verdict");
  c.require(raised, "NegativeSpectrum");
}

// 6. Divergence despite a real logarithm.
void divergence_with_real_log(Check& c) {
  Example e3 = example("ex3");
  MagnusSeries s = magnus_terms(*e3.polynomial, 30);
  const double tc = 2 * M_PI / 3;
  auto onset = radius_onset(s, 0.05, 4.0);
  c.detail << "radius onset " << (onset ? std::to_string(*onset) : "none") << " (window " << 0.95 * tc << ".."
           << 1.05 * tc << ")";
  c.require(onset && *onset >= 0.95 * tc && *onset <= 1.05 * tc, "radius onset");

  RealLog verdict = real_log_exists(solve_at(e3.function, 1.0, tc, 1e-12)).verdict;
  c.detail << ", real log at 2pi/3 " << to_string(verdict);
  c.require(verdict == RealLog::Yes, "real log verdict");

  auto printed_f = [](double t) {
    return (t * std::exp(2 * t) - (t + 3 * t * t) * std::exp(-t)) / (3 * (std::exp(-2 * t) - std::exp(t)));
  };
  for (double t : {0.25, 0.5, 1.0}) {
    ComplexMatrix log_y = logm_integral(solve_at(e3.function, 1.0, t, 1e-12));
    double diag_err = std::max(std::abs(log_y(0, 0) - 2 * t), std::abs(log_y(1, 1) + t));
    double err = std::abs(log_y(0, 1) - printed_f(t));
    c.detail << "; t=" << t << ": log Y(1,2) = " << std::setprecision(10) << log_y(0, 1).real() << " vs printed f "
             << printed_f(t) << std::setprecision(6);
    c.require(diag_err <= 1e-6, "diagonal of log Y at t=" + std::to_string(t));
    c.require(err <= 1e-6, "printed f at t=" + std::to_string(t));
  }
}

// 7. Quantitative reproduction for the 4x4 example.
void four_by_four(Check& c) {
  Example e4 = example("ex4");
  auto crossing = action_crossing(e4.function, M_PI);
  double g733 = action_norm(e4.function, 0.733);
  c.detail << "gamma = pi at " << (crossing ? std::to_string(*crossing) : "none") << ", gamma(0.733) = " << g733;
  c.require(crossing && std::abs(*crossing - 0.56) <= 0.01, "pi crossing");
  c.require(std::abs(g733 - 4.36) <= 0.05, "gamma(0.733)");

  SweepResult r = kappa_sweep(e4.function, 1.0, 128);
  if (r.alpha_star && r.event) {
    const CollisionEvent& ev = *r.event;
    c.detail << ", alpha* = " << *r.alpha_star << ", t* = " << ev.t_star << ", lambda* = " << ev.lambda_star.real()
             << (ev.lambda_star.imag() < 0 ? " - " : " + ") << std::abs(ev.lambda_star.imag()) << "i";
    c.require(std::abs(*r.alpha_star - 1.805) <= 0.02, "alpha*");
    c.require(std::abs(ev.t_star - 0.733) <= 0.005, "t*");
    c.require(std::abs(ev.lambda_star.real() + 0.485) <= 0.01, "Re lambda*");
    c.require(std::abs(ev.lambda_star.imag() - 0.0249) <= 0.01, "Im lambda*");
  } else {
    c.detail << ", sweep found no qualifying collision";
    c.require(false, "sweep");
  }

  // Onset of the 30-term partial sums: the radius estimator and the
  // independent blow-up indicator (10x the log Y baseline) must both land
  // in the bracket.
  const MagnusSeries& s = ex4_series();
  auto radius = radius_onset(s, 0.05, 1.0);
  auto blowup = partial_sum_onset(s, e4.function, 0.05, 1.0);
  c.detail << ", 30-term onset: radius " << (radius ? std::to_string(*radius) : "none") << ", blow-up "
           << (blowup ? std::to_string(*blowup) : "none") << " (bracket 0.65..0.85)";
  c.require(radius && *radius >= 0.65 && *radius <= 0.85, "radius onset bracket");
  c.require(blowup && *blowup >= 0.65 && *blowup <= 0.85, "blow-up onset bracket");
}

// 8. Certified times: exp of the 30-term partial sum reproduces Y.
void certified_convergence(Check& c) {
  std::vector<std::pair<std::string, PiecewisePolyMatrix>> problems;
  for (const auto& name : example_names()) {
    Example e = example(name);
    if (e.polynomial) problems.emplace_back(name, *e.polynomial);
  }
  std::mt19937 rng(1618);
  for (int k = 0; k < 20; ++k)
    problems.emplace_back("random" + std::to_string(k),
                          random_model(rng, 2 + static_cast<std::size_t>(k % 2), k % 3, Rational(3, 2)));

  // Worst residual separately for the corpus and the random systems.
  double worst[2] = {0, 0};
  std::string worst_at[2];
  int certified = 0;
  for (const auto& [name, poly] : problems) {
    const int group = name.rfind("random", 0) == 0 ? 1 : 0;
    MagnusSeries s = name == "ex4" ? ex4_series() : magnus_terms(poly, 30);
    MatrixFunction f = MatrixFunction::from_polynomial(poly);
    const int samples = 40;
    for (int k = 1; k <= samples; ++k) {
      double t = f.t_begin() + (f.t_end() - f.t_begin()) * k / samples;
      Certificate cert = certify(f, t);
      if (cert.verdict != Verdict::GuaranteedConvergent) continue;
      ++certified;
      ComplexMatrix y = solve_at(f, 1.0, t, 1e-12);
      double err = spectral_norm(ComplexMatrix(expm(to_complex(partial_sum(s, 30, t))) - y));
      if (err > worst[group]) {
        worst[group] = err;
        worst_at[group] = name + " t=" + std::to_string(t) + " gamma=" + std::to_string(cert.gamma);
      }
    }
  }
  c.detail << problems.size() << " problems (ex2 has no exact terms), " << certified
           << " certified times; worst residual corpus " << worst[0] << " (" << worst_at[0] << "), random "
           << worst[1] << " (" << worst_at[1] << ")";
  c.require(certified > 0, "some certified times");
  c.require(worst[0] <= 1e-5, "corpus residual bound");
  c.require(worst[1] <= 1e-5, "random residual bound");
}

// 9. Direction arclength bound and no cut eigenvalues below pi.
void arclength_bound(Check& c) {
  std::mt19937 rng(4242);
  std::normal_distribution<double> g;
  double worst_excess = -1e300;
  int cut_hits = 0, cut_checked = 0;
  for (const auto& name : example_names()) {
    Example e = example(name);
    const MatrixFunction& f = e.function;
    const double t = f.t_end();
    const double gamma = action_norm(f, t);
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd y0(static_cast<Eigen::Index>(f.dim()));
      for (Eigen::Index i = 0; i < y0.size(); ++i) y0(i) = g(rng);
      worst_excess = std::max(worst_excess, unit_direction_arclength(f, y0, t) - gamma);
    }
    auto crossing = action_crossing(f, M_PI - 1e-3);
    double t_limit = crossing ? *crossing : f.t_end();
    std::vector<double> grid;
    for (int k = 0; k <= 200; ++k) grid.push_back(f.t_begin() + (t_limit - f.t_begin()) * k / 200);
    FundamentalSolution sol = fundamental_solution(f, 1.0, grid, 1e-11);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (action_norm(f, grid[k]) >= M_PI - 1e-3) continue;
      ++cut_checked;
      for (Complex z : eigenvalues(sol.values[k]))
        if (on_negative_axis(z)) ++cut_hits;
    }
  }
  c.detail << "max(arclength - gamma) = " << worst_excess << " over 500 vectors, " << cut_hits
           << " negative-axis eigenvalues at " << cut_checked << " times with gamma < pi - 1e-3";
  c.require(worst_excess <= 1e-6, "arclength bound");
  c.require(cut_hits == 0, "negative-axis eigenvalue");
}

// 10. Numeric kernel roundtrips.
void kernels(Check& c) {
  std::mt19937 rng(777);
  std::normal_distribution<double> g;
  double worst_log = 0, worst_eig = 0;
  int unpaired = 0;
  for (int k = 0; k < 100; ++k) {
    int dim = 1 + k % 8;
    RealMatrix re(dim, dim), im(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        re(i, j) = g(rng);
        im(i, j) = g(rng);
      }
    ComplexMatrix m = k % 2 ? ComplexMatrix(to_complex(re)) : ComplexMatrix(to_complex(re) + Complex(0, 1) * to_complex(im));
    std::uniform_real_distribution<double> u(0.05, 1.0);
    m *= u(rng) / spectral_norm(m);
    worst_log = std::max(worst_log, (logm_integral(expm(m)) - m).norm());

    Spectrum sp = eig(m);
    auto vecs = eigenvectors(m, sp.eigenvalues);
    for (std::size_t i = 0; i < vecs.size(); ++i)
      worst_eig = std::max(worst_eig, (m * vecs[i] - sp.eigenvalues[i] * vecs[i]).norm());

    RealMatrix big = re * (1.0 + k % 5);
    auto ev = eig(big).eigenvalues;
    for (Complex z : ev)
      if (std::count(ev.begin(), ev.end(), std::conj(z)) != std::count(ev.begin(), ev.end(), z)) ++unpaired;
    auto vb = eigenvectors(to_complex(big), ev);
    for (std::size_t i = 0; i < vb.size(); ++i)
      worst_eig = std::max(worst_eig, (big * vb[i] - ev[i] * vb[i]).norm() / spectral_norm(big));
  }
  c.detail << "max |log(exp M) - M| = " << worst_log << ", max eig residual = " << worst_eig << ", " << unpaired
           << " unpaired conjugates";
  c.require(worst_log <= 1e-7, "log/exp roundtrip");
  c.require(worst_eig <= 1e-9, "eig residual");
  c.require(unpaired == 0, "conjugate closure");
}

// 11. Non-defective negative control.
void negative_control(Check& c) {
  Example e1 = example("ex1");
  Trajectory tr = eigenvalue_tracks(e1.function, 1.0, e1.function.t_end(), 200);
  int odd = 0, odd_defective = 0;
  for (const auto& ev : tr.events) {
    double m = ev.t_star / M_PI;
    long k = std::lround(m);
    if (k % 2 == 1 && std::abs(m - static_cast<double>(k)) < 1e-6) {
      ++odd;
      if (ev.defective) ++odd_defective;
    }
  }
  SweepResult r = kappa_sweep(e1.function, e1.function.t_end(), 128);
  MagnusSeries s = magnus_terms(*e1.polynomial, 30);
  int nonzero = 0;
  for (int n = 2; n <= 30; ++n)
    if (!s.term(n).is_zero()) ++nonzero;
  c.detail << odd << " collisions at odd multiples of pi (" << odd_defective << " defective), sweep "
           << (r.alpha_star ? "reported a qualifying event" : "reported none") << " among " << r.collisions.size()
           << " refined collisions, " << nonzero << " nonzero terms beyond the first of 30";
  c.require(odd >= 1, "collision at pi");
  c.require(odd_defective == 0, "non-defective");
  c.require(!r.alpha_star, "no qualifying sweep event");
  c.require(nonzero == 0, "higher terms vanish");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"paper-matrix regression", paper_matrices},
      {"upper-triangular series regression", triangular_terms},
      {"oracle equivalence", oracle_equivalence},
      {"BCH identity", bch_identity},
      {"sharpness witness", sharpness},
      {"divergence despite real logarithm", divergence_with_real_log},
      {"4x4 quantitative reproduction", four_by_four},
      {"certified convergence residual", certified_convergence},
      {"direction arclength bound", arclength_bound},
      {"numeric kernel roundtrips", kernels},
      {"non-defective negative control", negative_control}};

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Check c;
    auto start = std::chrono::steady_clock::now();
    try {
      criteria[k].second(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail << " [exception: " << e.what() << "]";
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!c.ok) ++failures;
    std::cout << (c.ok ? "PASS" : "FAIL") << " criterion " << k + 1 << " (" << criteria[k].first << "): "
              << c.detail.str() << " (" << std::fixed << std::setprecision(1) << secs << " s)" << std::defaultfloat
              << std::setprecision(6) << std::endl;
  }
  std::cout << criteria.size() - static_cast<std::size_t>(failures) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
