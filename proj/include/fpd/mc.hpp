#pragma once

// Independent ground truth: exact joint-Gaussian shadowing over the path's
// Euclidean geometry (covariance factorization, not the Markov
// approximation), i.i.d. Rician multipath, empirical first-passage
// statistics, and CDF-distance metrics.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fpd/multipath.hpp"
#include "fpd/path.hpp"
#include "fpd/types.hpp"
#include "fpd/volterra.hpp"

namespace fpd {

/// How trials are conditioned at the start node.
enum class Conditioning {
  none,                        // keep every trial
  below_threshold,             // require channel power < gamma_th at start
  below_threshold_minus_eps,   // require power < gamma_th - eps at start
  fixed_start,                 // pin the start power to gamma0 exactly
};

struct McConfig {
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  int horizon_steps = 0;
  Conditioning conditioning = Conditioning::below_threshold;
  double eps = 0.1;     // dB, for below_threshold_minus_eps
  double gamma0 = 0.0;  // dB, for fixed_start (no-multipath only)
  int batch = 256;
  bool record_start_values = false;
  double max_attempt_factor = 2000.0;  // attempt cap = trials * factor
};

struct EmpiricalFpd {
  std::vector<double> crossing_distances;  // sorted, connected trials only
  std::vector<int> crossing_steps;  // per retained trial in attempt order,
                                    // -1 when censored
  std::vector<double> start_values;  // start power per retained trial when
                                     // record_start_values is set
  std::size_t censored_count = 0;
  std::size_t total = 0;  // retained trials
  double delta_d = 0.0;

  /// Empirical CDF of the crossing distance (censored trials never count).
  double cdf_at(double d) const;
};

/// One exact multivariate-normal draw of the shadowing at every path point
/// (covariance sigma_sh_sq * exp(-euclidean/beta_sh)). Factorizes per call;
/// bulk consumers go through empirical_fpd. Throws on coincident points or a
/// covariance that stays non-positive-definite after one jitter pass.
std::vector<double> sample_shadowing(const DiscretizedPath& path,
                                     const ChannelParams& p,
                                     std::uint64_t seed);

/// i.i.d. dB multipath draws: Z = |nu + s(X + iY)|^2 with nu^2 = K/(1+K),
/// s^2 = 1/(2(1+K)) (unit-mean Rician power), returned as 10 log10(Z).
std::vector<double> sample_multipath_db(double k_ric, std::size_t count,
                                        std::uint64_t seed);

/// Empirical first-passage distances by rejection sampling: draw the joint
/// shadowing (+ multipath when configured), apply path loss, keep trials
/// satisfying the start conditioning, record the first index k >= 1 with
/// power >= gamma_th. Deterministic per (seed, attempt index) regardless of
/// batching. Throws when the conditioning acceptance rate falls below 1e-3.
EmpiricalFpd empirical_fpd(const DiscretizedPath& path, const ChannelParams& p,
                           const McConfig& cfg);

/// Same trial protocol but with first-order autoregressive shadowing along
/// arc length instead of the exact joint draw (distributionally equal on
/// straight paths; the comparison quantifies the Markov approximation on
/// curved ones).
EmpiricalFpd empirical_fpd_ar1(const DiscretizedPath& path,
                               const ChannelParams& p, const McConfig& cfg);

/// Sup-norm gap between the empirical CDF and the analytic CDF, evaluated on
/// the analytic grid.
double ks_distance(const EmpiricalFpd& emp, const FpdDensity& analytic);
double ks_distance(const EmpiricalFpd& emp, const FirstPassagePmf& analytic);

/// Two-sample sup-norm CDF gap, evaluated at every crossing distance of
/// either sample.
double ks_two_sample(const EmpiricalFpd& a, const EmpiricalFpd& b);

/// Raw trial dump: header trial,crossing_step,crossing_distance_m,censored;
/// censored rows carry -1 in the step and distance columns.
void dump_trials_csv(std::ostream& out, const EmpiricalFpd& emp);

}  // namespace fpd
