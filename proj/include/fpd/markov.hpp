#pragma once

// KL-divergence analysis of how much in-ball history beyond the immediately
// preceding point can perturb the conditional shadowing law, and the derived
// path admissibility quantities: ball radius, curvature threshold, and the
// overall approximately-Markovian certification.

#include <Eigen/Dense>
#include <vector>

#include "fpd/path.hpp"
#include "fpd/types.hpp"

namespace fpd {

/// Admissibility bundle: user tolerances on the KL mean/std plus the derived
/// unified tolerance, exclusion-ball radius, and curvature threshold.
struct MarkovTolerance {
  double eps_m = 0.0;      // max tolerable KL mean, nats
  double eps_sigma = 0.0;  // max tolerable KL std, nats
  double eps_d = 0.0;      // min(1 - e^{-2 eps_m}, sqrt(2) eps_sigma)
  double d_th = 0.0;       // exclusion-ball radius, m
  double kappa_th = 0.0;   // max admissible curvature, 1/m
};

/// Mean and standard deviation (over shadowing realizations) of the KL
/// divergence between the conditional law with and without one excluded
/// history point, plus the variance of the conditional-mean shift.
struct KlStats {
  double m_kl = 0.0;        // nats
  double sigma_kl = 0.0;    // nats
  double sigma_dm_sq = 0.0; // dB^2
};

/// Three-point analysis: current point, previous point at Euclidean
/// distance d1, excluded history point at distance dr from the current point
/// and d1r from the previous one. Requires dr > d1 > 0 and the triangle
/// inequality |dr - d1| <= d1r <= dr + d1.
KlStats three_point_kl(const ChannelParams& p, double d1, double dr,
                       double d1r);

struct ConditionalGaussian {
  Eigen::VectorXd alpha;  // conditional-mean coefficients on the history
  double sigma_sq = 0.0;  // conditional variance, dB^2
};

/// Exact multivariate-Gaussian conditioning of the shadowing at `current` on
/// the shadowing at `history` points (Euclidean covariances). Independent
/// linear-algebra oracle for the closed forms above.
ConditionalGaussian conditional_gaussian_oracle(
    const ChannelParams& p, const Eigen::Vector2d& current,
    const std::vector<Eigen::Vector2d>& history);

/// Unified KL tolerance min(1 - e^{-2 eps_m}, sqrt(2) eps_sigma).
double markov_eps_d(double eps_m, double eps_sigma);

/// Exclusion-ball radius: history farther than d_th from the current point
/// perturbs the conditional law by less than the tolerances even in the
/// worst geometry. Closed form (beta/2) ln(rho^2 + (1 - rho^2)/eps_d) with
/// rho = e^{-delta_d/beta}; returns 0 when eps_d >= 1 or delta_d = 0.
double ball_radius(const ChannelParams& p, double delta_d, double eps_m,
                   double eps_sigma);

/// Worst-case conditional-mean-shift ratio sigma_dm^2 / sigma_hat^2 for the
/// in-ball history of a constant-curvature arc, as a function of the exit
/// angle phi (chord geometry of the circle of curvature 1/kappa).
double circle_history_kl_ratio(const ChannelParams& p, double kappa,
                               double delta_d, double phi);

struct CurvatureThreshold {
  double kappa_th = 0.0;
  bool feasible_at_kappa_th = false;     // certificate, must be true
  bool feasible_at_1_05_kappa_th = true; // certificate, must be false
  double max_h_opt = 0.0;                // sup over phi at kappa_th
  bool used_dense_scan = false;          // bisection bracket broke down
};

/// Largest curvature kappa < 1/d_th whose in-ball history perturbation stays
/// within eps_d for every admissible exit angle. Outer bisection on kappa
/// with per-iteration bracket verification (dense 1024-point scan fallback),
/// inner 2048-point grid plus golden-section refinement over phi.
CurvatureThreshold curvature_threshold(const ChannelParams& p, double delta_d,
                                       double d_th, double eps_d);

/// KL statistics of the constant-curvature arc at the exit angle that
/// maximizes the history perturbation.
KlStats kl_stats_for_circle(const ChannelParams& p, double kappa,
                            double delta_d, double d_th);

struct Certification {
  MarkovTolerance tol;
  bool certified = false;
  double kappa_max = 0.0;
  bool curvature_ok = false;  // kappa_max < kappa_th
  LoopFreeResult loop;
  double margin = 0.0;  // kappa_th - kappa_max, 1/m
};

/// Full path admissibility: derives d_th and kappa_th from the tolerances,
/// then checks the pointwise curvature bound and d_th-loop-freedom.
Certification certify_path(const DiscretizedPath& path, const ChannelParams& p,
                           double eps_m, double eps_sigma);

}  // namespace fpd
