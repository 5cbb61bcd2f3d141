#pragma once

// Convergence certificates, real-logarithm verdicts, radius estimates and
// eigenvalue trajectories of Y(t; kappa).

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "magnus/linalg.hpp"
#include "magnus/ode.hpp"
#include "magnus/series.hpp"

namespace magnus {

// ------------------------------------------------------- certificates

enum class Verdict { GuaranteedConvergent, Unknown };
std::string to_string(Verdict v);

struct Threshold {
  std::string name;
  double value;
  bool pass;  // gamma < value
};

struct Certificate {
  double t = 0;
  double gamma = 0;
  Verdict verdict = Verdict::Unknown;
  double safety_margin = 0;
  std::vector<Threshold> thresholds;
};

/// Sufficient bounds r in "int ||A|| < r implies convergence", ending with pi.
const std::vector<std::pair<std::string, double>>& convergence_thresholds();

inline constexpr double kCertificateTol = 1e-8;

Certificate certify(const MatrixFunction& a, double t, double safety_margin = 1e-6);

/// Smallest t with gamma(t) = level, if gamma reaches level on the domain.
std::optional<double> action_crossing(const MatrixFunction& a, double level);

// ----------------------------------------------------- real logarithm

enum class RealLog { Yes, No, PrincipalBranchInapplicable };
std::string to_string(RealLog v);

struct RealLogReport {
  RealLog verdict = RealLog::Yes;
  /// Eigenvalues on the closed negative real axis.
  std::vector<Complex> negative_eigenvalues;
  /// Some negative eigenvalue has geometric < algebraic multiplicity.
  bool defective = false;
};

/// Yes when no eigenvalue is on (-inf, 0]; No when a negative eigenvalue
/// has a Jordan block size occurring an odd number of times (detected from
/// ranks of powers of Y - lambda I); otherwise PrincipalBranchInapplicable.
RealLogReport real_log_exists(const ComplexMatrix& y, double rank_tol = 1e-6);

// ---------------------------------------------------------- radius

/// 1 / max_{n in last `window` terms} ||Omega_n(t)||^(1/n); infinity when
/// those terms all vanish. Needs order >= 20.
double empirical_radius(const MagnusSeries& s, double t, int window = 10);

/// First t where empirical_radius drops below 1: scan `samples` points of
/// [t_lo, t_hi], then bisect.
std::optional<double> radius_onset(const MagnusSeries& s, double t_lo, double t_hi, int samples = 200);

/// First t where ||partial_sum(s, n, t)||_2 > factor * ||log Y(t)||_2.
std::optional<double> partial_sum_onset(const MagnusSeries& s, const MatrixFunction& a, double t_lo, double t_hi,
                                        int n = 30, double factor = 10, int samples = 200);

// ------------------------------------------------------ trajectories

struct CollisionEvent {
  double t_star = 0;
  Complex lambda_star;
  std::pair<std::size_t, std::size_t> tracks;
  /// |lambda_i - lambda_j| at t_star.
  double gap = 0;
  int algebraic_multiplicity = 0;
  int geometric_multiplicity = 0;
  bool defective = false;
  /// Rank decision sits close to its threshold.
  bool unstable = false;
  int winding = 0;
  /// Winding under the other matching, when assignment was ambiguous.
  std::optional<int> alternate_winding;

  bool encircles_origin() const { return winding != 0; }
};

struct Trajectory {
  Complex kappa;
  std::vector<double> grid;
  /// tracks[i][k] = lambda_i(grid[k]).
  std::vector<std::vector<Complex>> tracks;
  std::vector<ComplexMatrix> solutions;
  std::vector<CollisionEvent> events;
  /// Steps k -> k+1 whose best and second-best matchings tie within 1e-12.
  std::vector<std::size_t> ambiguous_steps;
};

struct TrackOptions {
  double collision_tol = 1e-4;
  double t_tol = 1e-8;
  /// Largest allowed eigenvalue move between samples, relative to max(1, |lambda|).
  double max_move = 0.05;
  int max_refinements = 10;
  double defect_tol = 1e-6;
  double ode_tol = 1e-11;
};

/// Orders each spectrum so index i follows one continuous path. Matching
/// minimizes the summed distance to the linear prediction
/// 2 lambda(k) - lambda(k-1), exhaustively over permutations (dim <= 8).
/// ambiguous receives the step indices whose matching was a tie.
std::vector<std::vector<Complex>> assign_tracks(const std::vector<std::vector<Complex>>& spectra,
                                                std::vector<std::size_t>* ambiguous = nullptr);

Trajectory eigenvalue_tracks(const MatrixFunction& a, Complex kappa, double t_end, int samples,
                             const TrackOptions& opts = {});

/// Fills multiplicities, defectiveness and winding for an event whose
/// t_star, lambda_star and tracks are set.
CollisionEvent collision_classify(const Trajectory& tr, CollisionEvent ev, const ComplexMatrix& y_at,
                                  const TrackOptions& opts = {});

struct SweepPoint {
  double alpha = 0;
  /// Closest approach of two eigenvalues over (0, t_max].
  double t_closest = 0;
  double gap = 0;
};

struct SweepResult {
  std::vector<SweepPoint> grid;
  /// Earliest defective, origin-encircling collision after refinement.
  std::optional<double> alpha_star;
  std::optional<CollisionEvent> event;
  /// Every refined collision, qualifying or not, with its alpha.
  std::vector<std::pair<double, CollisionEvent>> collisions;
};

SweepResult kappa_sweep(const MatrixFunction& a, double t_max, int alpha_samples, int t_samples = 200,
                        const TrackOptions& opts = {});

}  // namespace magnus
