#include "magnus/diagnostics.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>

#include "magnus/error.hpp"

namespace magnus {

namespace {

constexpr double kPi = std::numbers::pi;

// Golden-section search for a minimum of f on [lo, hi], to bracket width tol.
// Returns (x, f(x)). Unlike Brent-style minimizers this keeps shrinking
// below sqrt(eps), which matters for the square-root cusps of eigenvalue
// gaps at a collision.
std::pair<double, double> golden_min(const std::function<double(double)>& f, double lo, double hi, double tol) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  double x1 = hi - r * (hi - lo);
  double x2 = lo + r * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

double min_pair_gap(const std::vector<Complex>& ev) {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ev.size(); ++i) {
    for (std::size_t j = i + 1; j < ev.size(); ++j) g = std::min(g, std::abs(ev[i] - ev[j]));
  }
  return g;
}

// Distance between the two eigenvalues nearest to c, and their midpoint.
std::pair<double, Complex> local_gap(const std::vector<Complex>& ev, Complex c) {
  std::vector<std::size_t> idx(ev.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + 2, idx.end(),
                    [&](std::size_t p, std::size_t q) { return std::abs(ev[p] - c) < std::abs(ev[q] - c); });
  return {std::abs(ev[idx[0]] - ev[idx[1]]), 0.5 * (ev[idx[0]] + ev[idx[1]])};
}

ComplexMatrix advance_to(const MatrixFunction& a, Complex kappa, const ComplexMatrix& y0, double t0, double t1,
                         double tol) {
  if (t1 <= t0) return y0;
  return propagate(a, kappa, y0, {t0, t1}, tol).values.back();
}

std::vector<double> uniform_grid(double lo, double hi, int intervals) {
  std::vector<double> g(static_cast<std::size_t>(intervals) + 1);
  for (int k = 0; k <= intervals; ++k) g[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / intervals;
  g.back() = hi;
  return g;
}

// Total continuous change of argument along a path of nonzero values.
double arg_change(const std::vector<Complex>& path) {
  double total = 0;
  for (std::size_t k = 1; k < path.size(); ++k) total += std::arg(path[k] / path[k - 1]);
  return total;
}

}  // namespace

// ------------------------------------------------------- certificates

std::string to_string(Verdict v) { return v == Verdict::GuaranteedConvergent ? "GuaranteedConvergent" : "Unknown"; }

const std::vector<std::pair<std::string, double>>& convergence_thresholds() {
  static const std::vector<std::pair<std::string, double>> table{
      {"log2", std::numbers::ln2},      {"half_log2", 0.5 * std::numbers::ln2}, {"0.57745", 0.57745}, {"1", 1.0},
      {"1.08688", 1.08688},             {"2", 2.0},                             {"pi", kPi}};
  return table;
}

Certificate certify(const MatrixFunction& a, double t, double safety_margin) {
  if (!(safety_margin >= 0)) throw InputError("safety margin must be nonnegative");
  Certificate c;
  c.t = t;
  c.safety_margin = safety_margin;
  c.gamma = t == a.t_begin() ? 0.0 : action_norm(a, t, kCertificateTol);
  c.verdict = c.gamma < kPi - safety_margin ? Verdict::GuaranteedConvergent : Verdict::Unknown;
  for (const auto& [name, r] : convergence_thresholds()) c.thresholds.push_back({name, r, c.gamma < r});
  return c;
}

std::optional<double> action_crossing(const MatrixFunction& a, double level) {
  if (level <= 0) return a.t_begin();
  auto g = [&](double t) { return action_norm(a, t, 1e-12) - level; };
  if (g(a.t_end()) < 0) return std::nullopt;
  std::uintmax_t iters = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(g, a.t_begin(), a.t_end(), -level, g(a.t_end()),
                                                          boost::math::tools::eps_tolerance<double>(44), iters);
  return 0.5 * (lo + hi);
}

// ----------------------------------------------------- real logarithm

std::string to_string(RealLog v) {
  switch (v) {
    case RealLog::Yes:
      return "Yes";
    case RealLog::No:
      return "No";
    case RealLog::PrincipalBranchInapplicable:
      return "PrincipalBranchInapplicable";
  }
  return "?";
}

RealLogReport real_log_exists(const ComplexMatrix& y, double rank_tol) {
  const double norm = spectral_norm(y);
  if (y.imag().cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, norm)) {
    throw InputError("real_log_exists: matrix is not real");
  }
  const auto n = y.rows();
  if (norm == 0 || numerical_rank(y, 1e-14 * norm) < n) throw SingularMatrix("real_log_exists: matrix is singular");

  RealLogReport report;
  for (Complex z : eigenvalues(y)) {
    if (on_negative_axis(z)) report.negative_eigenvalues.push_back(z);
  }
  if (report.negative_eigenvalues.empty()) return report;

  // Cluster nearly equal negative eigenvalues; a perturbed Jordan block
  // splits by roughly sqrt(rounding).
  auto vals = report.negative_eigenvalues;
  std::sort(vals.begin(), vals.end(), [](Complex p, Complex q) { return p.real() < q.real(); });
  std::vector<std::vector<Complex>> clusters;
  for (Complex z : vals) {
    if (!clusters.empty() && std::abs(z - clusters.back().back()) <= 1e-4 * std::max(1.0, std::abs(z))) {
      clusters.back().push_back(z);
    } else {
      clusters.push_back({z});
    }
  }

  bool odd_block = false;
  for (const auto& cl : clusters) {
    Complex center = 0;
    for (Complex z : cl) center += z;
    center /= static_cast<double>(cl.size());
    center = Complex(center.real(), 0);
    const int m = static_cast<int>(cl.size());
    if (geometric_multiplicity(y, center, rank_tol) < m) report.defective = true;

    // rank[k] = rank((Y - lambda I)^k); blocks of size >= k number rank[k-1] - rank[k].
    const ComplexMatrix shifted = y - center * ComplexMatrix::Identity(n, n);
    std::vector<int> rank{static_cast<int>(n)};
    ComplexMatrix power = ComplexMatrix::Identity(n, n);
    for (int k = 1; k <= m + 1; ++k) {
      power = power * shifted;
      rank.push_back(numerical_rank(power, rank_tol * std::pow(std::max(1.0, norm), k)));
    }
    for (int k = 1; k <= m; ++k) {
      const int at_least_k = rank[static_cast<std::size_t>(k - 1)] - rank[static_cast<std::size_t>(k)];
      const int at_least_k1 = rank[static_cast<std::size_t>(k)] - rank[static_cast<std::size_t>(k + 1)];
      if ((at_least_k - at_least_k1) % 2 != 0) odd_block = true;
    }
  }
  report.verdict = odd_block ? RealLog::No : RealLog::PrincipalBranchInapplicable;
  return report;
}

// ---------------------------------------------------------- radius

double empirical_radius(const MagnusSeries& s, double t, int window) {
  if (s.order() < 20) throw InputError("empirical_radius needs at least 20 terms");
  if (window < 1 || window > s.order()) throw InputError("empirical_radius: bad tail window");
  double root = 0;
  for (int n = s.order() - window + 1; n <= s.order(); ++n) {
    const double norm = spectral_norm(s.term_value(n, t));
    if (norm > 0) root = std::max(root, std::pow(norm, 1.0 / n));
  }
  return root == 0 ? std::numeric_limits<double>::infinity() : 1.0 / root;
}

std::optional<double> radius_onset(const MagnusSeries& s, double t_lo, double t_hi, int samples) {
  if (samples < 2 || !(t_hi > t_lo)) throw InputError("radius_onset: bad scan range");
  const auto grid = uniform_grid(t_lo, t_hi, samples);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (empirical_radius(s, grid[k]) >= 1) continue;
    if (k == 0) return grid[0];
    double lo = grid[k - 1];
    double hi = grid[k];
    while (hi - lo > 1e-9) {
      const double mid = 0.5 * (lo + hi);
      (empirical_radius(s, mid) < 1 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
  }
  return std::nullopt;
}

std::optional<double> partial_sum_onset(const MagnusSeries& s, const MatrixFunction& a, double t_lo, double t_hi,
                                        int n, double factor, int samples) {
  if (samples < 2 || !(t_hi > t_lo)) throw InputError("partial_sum_onset: bad scan range");
  auto grid = uniform_grid(t_lo, t_hi, samples);
  if (grid.front() == a.t_begin()) grid.erase(grid.begin());
  std::vector<double> solve_grid{a.t_begin()};
  solve_grid.insert(solve_grid.end(), grid.begin(), grid.end());
  const auto fs = fundamental_solution(a, 1.0, solve_grid);

  auto ratio = [&](double t, const ComplexMatrix& y) {
    const double log_norm = spectral_norm(logm_integral(y));
    return spectral_norm(partial_sum(s, n, t)) / log_norm;
  };
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (ratio(grid[k], fs.values[k + 1]) <= factor) continue;
    double lo = fs.grid[k];
    double hi = grid[k];
    const ComplexMatrix y_lo = fs.values[k];
    while (hi - lo > 1e-9) {
      const double mid = 0.5 * (lo + hi);
      const ComplexMatrix y = advance_to(a, 1.0, y_lo, fs.grid[k], mid, kDefaultOdeTol);
      (ratio(mid, y) > factor ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
  }
  return std::nullopt;
}

// ------------------------------------------------------ trajectories

std::vector<std::vector<Complex>> assign_tracks(const std::vector<std::vector<Complex>>& spectra,
                                                std::vector<std::size_t>* ambiguous) {
  if (spectra.empty()) return {};
  const std::size_t n = spectra.front().size();
  std::vector<std::vector<Complex>> tracks(n, std::vector<Complex>(spectra.size()));
  for (std::size_t i = 0; i < n; ++i) tracks[i][0] = spectra[0][i];

  for (std::size_t k = 1; k < spectra.size(); ++k) {
    const auto& next = spectra[k];
    if (next.size() != n) throw DimensionMismatch("assign_tracks: spectra differ in size");
    std::vector<Complex> pred(n);
    for (std::size_t i = 0; i < n; ++i) pred[i] = k >= 2 ? 2.0 * tracks[i][k - 1] - tracks[i][k - 2] : tracks[i][k - 1];

    std::vector<std::size_t> best(n);
    std::iota(best.begin(), best.end(), 0);
    if (n <= 8) {
      std::vector<std::size_t> perm = best;
      double best_cost = std::numeric_limits<double>::infinity();
      double second_cost = best_cost;
      do {
        double cost = 0;
        for (std::size_t i = 0; i < n; ++i) cost += std::abs(pred[i] - next[perm[i]]);
        if (cost < best_cost) {
          second_cost = best_cost;
          best_cost = cost;
          best = perm;
        } else if (cost < second_cost) {
          second_cost = cost;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
      // Step 0 -> 1 always ties: every track starts at the same point.
      if (ambiguous && k >= 2 && second_cost - best_cost <= 1e-12) ambiguous->push_back(k - 1);
    } else {
      std::vector<bool> used(n, false);
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t pick = n;
        for (std::size_t q = 0; q < n; ++q) {
          if (!used[q] && (pick == n || std::abs(pred[i] - next[q]) < std::abs(pred[i] - next[pick]))) pick = q;
        }
        used[pick] = true;
        best[i] = pick;
      }
    }
    for (std::size_t i = 0; i < n; ++i) tracks[i][k] = next[best[i]];
  }
  return tracks;
}

CollisionEvent collision_classify(const Trajectory& tr, CollisionEvent ev, const ComplexMatrix& y_at,
                                  const TrackOptions& opts) {
  const auto spectrum = eigenvalues(y_at);
  ev.algebraic_multiplicity = 0;
  for (Complex z : spectrum) {
    if (std::abs(z - ev.lambda_star) <= opts.collision_tol) ++ev.algebraic_multiplicity;
  }
  ev.geometric_multiplicity = geometric_multiplicity(y_at, ev.lambda_star, opts.defect_tol);
  ev.defective = ev.geometric_multiplicity < ev.algebraic_multiplicity;

  const auto n = y_at.rows();
  const Eigen::JacobiSVD<ComplexMatrix> svd(y_at - ev.lambda_star * ComplexMatrix::Identity(n, n));
  const double threshold = opts.defect_tol * spectral_norm(y_at);
  ev.unstable = false;
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
    const double sv = svd.singularValues()(k);
    if (sv > 0.1 * threshold && sv < 10 * threshold) ev.unstable = true;
  }

  // Loop: track i from lambda = 1 to lambda_star, back along track j.
  std::size_t m = 0;
  while (m + 1 < tr.grid.size() && tr.grid[m + 1] <= ev.t_star) ++m;
  const auto [i, j] = ev.tracks;
  auto path = [&](std::size_t first, std::size_t second, std::size_t switch_at) {
    std::vector<Complex> p;
    for (std::size_t k = 0; k <= m; ++k) p.push_back(k <= switch_at ? tr.tracks[first][k] : tr.tracks[second][k]);
    p.push_back(ev.lambda_star);
    return arg_change(p);
  };
  const double turn = (path(i, i, m) - path(j, j, m)) / (2 * kPi);
  ev.winding = static_cast<int>(std::lround(turn));

  ev.alternate_winding.reset();
  std::optional<std::size_t> last_ambiguous;
  for (std::size_t s : tr.ambiguous_steps) {
    if (s < m) last_ambiguous = s;
  }
  if (last_ambiguous) {
    const double alt = (path(i, j, *last_ambiguous) - path(j, i, *last_ambiguous)) / (2 * kPi);
    ev.alternate_winding = static_cast<int>(std::lround(alt));
  }
  return ev;
}

Trajectory eigenvalue_tracks(const MatrixFunction& a, Complex kappa, double t_end, int samples,
                             const TrackOptions& opts) {
  if (samples < 100) throw InputError("eigenvalue_tracks needs at least 100 samples");
  if (!(t_end > a.t_begin())) throw DomainError("eigenvalue_tracks: t_end must exceed the domain start");
  const auto fs = fundamental_solution(a, kappa, uniform_grid(a.t_begin(), t_end, samples), opts.ode_tol);

  std::vector<double> times = fs.grid;
  std::vector<ComplexMatrix> ys = fs.values;
  std::vector<std::vector<Complex>> spectra;
  std::vector<int> level(times.size(), 0);
  for (const auto& y : ys) spectra.push_back(eigenvalues(y));

  // Largest relative move under the best matching between two spectra.
  auto movement = [](const std::vector<Complex>& p, const std::vector<Complex>& q) {
    const auto matched = assign_tracks({p, q});
    double worst = 0;
    for (const auto& tr : matched) worst = std::max(worst, std::abs(tr[1] - tr[0]) / std::max(1.0, std::abs(tr[0])));
    return worst;
  };
  for (std::size_t k = 0; k + 1 < times.size();) {
    const int lvl = std::max(level[k], level[k + 1]) + 1;
    if (lvl > opts.max_refinements || movement(spectra[k], spectra[k + 1]) <= opts.max_move) {
      ++k;
      continue;
    }
    const double mid = 0.5 * (times[k] + times[k + 1]);
    ComplexMatrix y = advance_to(a, kappa, ys[k], times[k], mid, opts.ode_tol);
    spectra.insert(spectra.begin() + static_cast<std::ptrdiff_t>(k + 1), eigenvalues(y));
    ys.insert(ys.begin() + static_cast<std::ptrdiff_t>(k + 1), std::move(y));
    times.insert(times.begin() + static_cast<std::ptrdiff_t>(k + 1), mid);
    level.insert(level.begin() + static_cast<std::ptrdiff_t>(k + 1), lvl);
  }

  Trajectory tr;
  tr.kappa = kappa;
  tr.grid = times;
  tr.solutions = ys;
  tr.tracks = assign_tracks(spectra, &tr.ambiguous_steps);

  const std::size_t n = tr.tracks.size();
  const std::size_t last = times.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      auto gap = [&](std::size_t k) { return std::abs(tr.tracks[i][k] - tr.tracks[j][k]); };
      for (std::size_t k = 1; k <= last; ++k) {
        const double g = gap(k);
        if (g > gap(k - 1) || (k < last && g > gap(k + 1))) continue;
        const double scale = std::max(1.0, std::abs(tr.tracks[i][k]));
        if (g > 4 * opts.max_move * scale) continue;

        const Complex center = 0.5 * (tr.tracks[i][k] + tr.tracks[j][k]);
        const double lo = times[k - 1];
        const double hi = times[std::min(k + 1, last)];
        auto f = [&](double t) { return local_gap(eigenvalues(advance_to(a, kappa, ys[k - 1], lo, t, opts.ode_tol)), center).first; };
        const auto [t_star, g_star] = golden_min(f, lo, hi, opts.t_tol);
        if (g_star >= opts.collision_tol) continue;
        bool duplicate = false;
        for (const auto& e : tr.events) {
          if (e.tracks == std::pair{i, j} && std::abs(e.t_star - t_star) < 1e-6) duplicate = true;
        }
        if (duplicate) continue;

        const ComplexMatrix y_star = advance_to(a, kappa, ys[k - 1], lo, t_star, opts.ode_tol);
        CollisionEvent ev;
        ev.t_star = t_star;
        std::tie(ev.gap, ev.lambda_star) = local_gap(eigenvalues(y_star), center);
        ev.tracks = {i, j};
        tr.events.push_back(collision_classify(tr, ev, y_star, opts));
      }
    }
  }
  std::sort(tr.events.begin(), tr.events.end(),
            [](const CollisionEvent& p, const CollisionEvent& q) { return p.t_star < q.t_star; });
  return tr;
}

// ------------------------------------------------------------ sweep

SweepResult kappa_sweep(const MatrixFunction& a, double t_max, int alpha_samples, int t_samples,
                        const TrackOptions& opts) {
  if (alpha_samples < 64) throw InputError("kappa_sweep needs at least 64 alpha samples");
  if (t_samples < 100) throw InputError("kappa_sweep needs at least 100 time samples");
  if (!(t_max > a.t_begin())) throw DomainError("kappa_sweep: t_max must exceed the domain start");
  a.piece_index(t_max);

  const auto tgrid = uniform_grid(a.t_begin(), t_max, t_samples);
  const auto na = static_cast<std::size_t>(alpha_samples);
  const std::size_t nt = tgrid.size();
  const double dalpha = 2 * kPi / alpha_samples;
  auto kappa_of = [](double alpha) { return std::polar(1.0, alpha); };

  // gap[p][m]: closest pair of eigenvalues of Y(t_m; e^{i alpha_p}).
  std::vector<std::vector<double>> gap(na, std::vector<double>(nt));
  SweepResult result;
  for (std::size_t p = 0; p < na; ++p) {
    const double alpha = dalpha * static_cast<double>(p);
    const auto fs = fundamental_solution(a, kappa_of(alpha), tgrid, opts.ode_tol);
    for (std::size_t m = 0; m < nt; ++m) gap[p][m] = min_pair_gap(eigenvalues(fs.values[m]));

    SweepPoint pt{alpha, t_max, gap[p][nt - 1]};
    for (std::size_t m = 1; m + 1 < nt; ++m) {
      if (gap[p][m] <= gap[p][m - 1] && gap[p][m] <= gap[p][m + 1] && gap[p][m] < pt.gap) {
        pt.t_closest = tgrid[m];
        pt.gap = gap[p][m];
      }
    }
    result.grid.push_back(pt);
  }

  // Local minima of the gap over the (alpha, t) grid seed joint refinement.
  struct Seed {
    std::size_t p, m;
    double g;
  };
  std::vector<Seed> seeds;
  for (std::size_t p = 0; p < na; ++p) {
    for (std::size_t m = 1; m < nt; ++m) {
      const double g = gap[p][m];
      bool is_min = g < 0.3;
      for (int dp = -1; dp <= 1 && is_min; ++dp) {
        for (int dm = -1; dm <= 1 && is_min; ++dm) {
          if (dp == 0 && dm == 0) continue;
          const std::size_t q = (p + na - 1 + static_cast<std::size_t>(dp + 1)) % na;
          const auto mm = static_cast<std::ptrdiff_t>(m) + dm;
          if (mm < 0 || mm >= static_cast<std::ptrdiff_t>(nt)) continue;
          if (gap[q][static_cast<std::size_t>(mm)] < g) is_min = false;
        }
      }
      if (is_min) seeds.push_back({p, m, g});
    }
  }
  std::sort(seeds.begin(), seeds.end(), [](const Seed& x, const Seed& y) { return x.g < y.g; });
  if (seeds.size() > 16) seeds.resize(16);

  const double refine_tol = std::min(opts.ode_tol, 1e-12);
  for (const auto& seed : seeds) {
    double a_lo = dalpha * (static_cast<double>(seed.p) - 1);
    double a_hi = dalpha * (static_cast<double>(seed.p) + 1);
    double t_lo = tgrid[seed.m - 1];
    double t_hi = tgrid[std::min(seed.m + 1, nt - 1)];
    double alpha_star = 0;
    double t_star = 0;
    double g_star = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < 6; ++attempt) {
      auto inner = [&](double alpha, double* t_at) {
        const Complex kappa = kappa_of(alpha);
        const ComplexMatrix y_lo = solve_at(a, kappa, t_lo, refine_tol);
        auto f = [&](double t) { return min_pair_gap(eigenvalues(advance_to(a, kappa, y_lo, t_lo, t, refine_tol))); };
        const auto [t, g] = golden_min(f, t_lo, t_hi, 1e-11);
        if (t_at) *t_at = t;
        return g;
      };
      const auto [al, g] = golden_min([&](double alpha) { return inner(alpha, nullptr); }, a_lo, a_hi, 1e-12);
      alpha_star = al;
      g_star = inner(al, &t_star);
      // Re-centre when the minimum sits on the edge of its bracket.
      const double wa = a_hi - a_lo;
      const double wt = t_hi - t_lo;
      const bool alpha_edge = alpha_star - a_lo < 1e-3 * wa || a_hi - alpha_star < 1e-3 * wa;
      const bool t_edge = (t_star - t_lo < 1e-3 * wt && t_lo > tgrid[1]) || (t_hi - t_star < 1e-3 * wt && t_hi < t_max);
      if (alpha_edge) {
        a_lo = alpha_star - 0.5 * wa;
        a_hi = alpha_star + 0.5 * wa;
      }
      if (t_edge) {
        t_lo = std::max(tgrid[1], t_star - 0.5 * wt);
        t_hi = std::min(t_max, t_star + 0.5 * wt);
      }
      const bool moved = alpha_edge || t_edge;
      if (!moved) break;
    }
    if (g_star >= opts.collision_tol) continue;
    alpha_star = std::fmod(std::fmod(alpha_star, 2 * kPi) + 2 * kPi, 2 * kPi);

    TrackOptions track_opts = opts;
    track_opts.ode_tol = refine_tol;
    const Trajectory tr = eigenvalue_tracks(a, kappa_of(alpha_star), t_max, t_samples, track_opts);
    const CollisionEvent* match = nullptr;
    for (const auto& e : tr.events) {
      if (std::abs(e.t_star - t_star) < 1e-3 && (!match || std::abs(e.t_star - t_star) < std::abs(match->t_star - t_star))) {
        match = &e;
      }
    }
    if (!match) continue;
    bool duplicate = false;
    for (const auto& [al, e] : result.collisions) {
      if (std::abs(al - alpha_star) < 1e-6 && std::abs(e.t_star - match->t_star) < 1e-6) duplicate = true;
    }
    if (!duplicate) result.collisions.emplace_back(alpha_star, *match);
  }

  std::sort(result.collisions.begin(), result.collisions.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  for (const auto& [alpha, ev] : result.collisions) {
    if (!ev.defective || !ev.encircles_origin()) continue;
    const bool earlier = !result.event || ev.t_star < result.event->t_star - 1e-6;
    // Conjugate partners (alpha, 2 pi - alpha) collide at the same time;
    // keep the one in [0, pi].
    const bool tie_pref = result.event && std::abs(ev.t_star - result.event->t_star) <= 1e-6 && alpha <= kPi &&
                          *result.alpha_star > kPi;
    if (earlier || tie_pref) {
      result.event = ev;
      result.alpha_star = alpha;
    }
  }
  return result;
}

}  // namespace magnus
