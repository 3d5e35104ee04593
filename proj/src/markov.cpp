#include "fpd/markov.hpp"

#include <cmath>
#include <stdexcept>

#include "fpd/channel.hpp"
#include "fpd/math.hpp"

namespace fpd {

namespace {

/// sigma_dm^2 / sigma_hat^2 from the stable exponential forms; dr <= d1 + d1r
/// is assumed (triangle inequality).
double mean_shift_ratio(double d1, double dr, double d1r, double beta) {
  const double num_root = std::exp(-dr / beta) *
                          std::expm1(-(d1 + d1r - dr) / beta);
  const double den =
      std::expm1(-2.0 * d1r / beta) * std::expm1(-2.0 * d1 / beta);
  return num_root * num_root / den;  // both expm1 factors negative
}

}  // namespace

KlStats three_point_kl(const ChannelParams& p, double d1, double dr,
                       double d1r) {
  p.validate();
  if (!(d1 > 0.0) || !(dr > d1)) {
    throw std::domain_error("three_point_kl: requires dr > d1 > 0");
  }
  const double lo = std::abs(dr - d1);
  const double hi = dr + d1;
  if (d1r < lo - 1e-12 * hi || d1r > hi + 1e-12 * hi) {
    throw std::domain_error("three_point_kl: triangle inequality violated");
  }
  const double beta = p.beta_sh;
  const double sigma_hat_sq =
      p.sigma_sh_sq * (-std::expm1(-2.0 * d1 / beta));
  double ratio = 0.0;
  if (d1r > 0.0) {
    ratio = mean_shift_ratio(d1, dr, std::min(d1r, hi), beta);
  }
  if (ratio >= 1.0) {
    throw std::domain_error(
        "three_point_kl: tolerance breakdown (mean-shift variance reaches "
        "the conditional variance)");
  }
  KlStats out;
  out.sigma_dm_sq = ratio * sigma_hat_sq;
  out.m_kl = -0.5 * std::log1p(-ratio);
  out.sigma_kl = ratio / std::sqrt(2.0);
  return out;
}

ConditionalGaussian conditional_gaussian_oracle(
    const ChannelParams& p, const Eigen::Vector2d& current,
    const std::vector<Eigen::Vector2d>& history) {
  p.validate();
  const Eigen::Index n = static_cast<Eigen::Index>(history.size());
  if (n == 0) {
    throw std::invalid_argument(
        "conditional_gaussian_oracle: empty history");
  }
  Eigen::MatrixXd cov(n, n);
  Eigen::VectorXd cross(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cross(i) = shadowing_cov(p, (current - history[i]).norm());
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double dist = (history[i] - history[j]).norm();
      if (i != j && dist < 1e-9) {
        throw std::invalid_argument(
            "conditional_gaussian_oracle: coincident history points");
      }
      cov(i, j) = cov(j, i) = shadowing_cov(p, dist);
    }
  }
  ConditionalGaussian out;
  out.alpha = cov.ldlt().solve(cross);
  out.sigma_sq = p.sigma_sh_sq - cross.dot(out.alpha);
  return out;
}

double markov_eps_d(double eps_m, double eps_sigma) {
  if (!(eps_m > 0.0) || !(eps_sigma > 0.0)) {
    throw std::domain_error("markov_eps_d: tolerances must be > 0");
  }
  return std::min(-std::expm1(-2.0 * eps_m), std::sqrt(2.0) * eps_sigma);
}

double ball_radius(const ChannelParams& p, double delta_d, double eps_m,
                   double eps_sigma) {
  p.validate();
  if (delta_d < 0.0) {
    throw std::domain_error("ball_radius: delta_d must be >= 0");
  }
  const double eps_d = markov_eps_d(eps_m, eps_sigma);
  if (eps_d >= 1.0) return 0.0;  // unit tolerance: no exclusion ball needed
  const double rho_sq = std::exp(-2.0 * delta_d / p.beta_sh);
  if (rho_sq >= 1.0) return 0.0;  // zero step size degenerates
  return 0.5 * p.beta_sh * std::log(rho_sq + (1.0 - rho_sq) / eps_d);
}

double circle_history_kl_ratio(const ChannelParams& p, double kappa,
                               double delta_d, double phi) {
  if (!(kappa > 0.0) || !(phi > 0.0)) return 0.0;
  const double r = 1.0 / kappa;
  const double dphi = 2.0 * std::asin(std::min(0.5 * kappa * delta_d, 1.0));
  // Chord geometry on the circle of curvature kappa: previous grid point at
  // angle dphi behind the current one, excluded history point a further phi
  // behind.
  const double d1 = 2.0 * r * std::sin(0.5 * dphi);  // == delta_d
  const double d1r = 2.0 * r * std::sin(0.5 * phi);
  const double dr = 2.0 * r * std::sin(0.5 * (phi + dphi));
  return mean_shift_ratio(d1, dr, d1r, p.beta_sh);
}

namespace {

struct PhiMax {
  double phi = 0.0;
  double value = 0.0;
};

/// Inner maximization of the history perturbation over the admissible exit
/// angle phi in (0, h_cons(kappa)]: dense grid then golden refinement.
PhiMax max_ratio_over_phi(const ChannelParams& p, double kappa,
                          double delta_d, double d_th) {
  const double dphi = 2.0 * std::asin(std::min(0.5 * kappa * delta_d, 1.0));
  const double h_cons =
      2.0 * std::asin(std::min(0.5 * kappa * d_th, 1.0)) - dphi;
  PhiMax best;
  if (h_cons <= 0.0) return best;  // ball smaller than one step: no history
  const int n_grid = 2048;
  int best_i = 0;
  for (int i = 1; i <= n_grid; ++i) {
    const double phi = h_cons * i / n_grid;
    const double v = circle_history_kl_ratio(p, kappa, delta_d, phi);
    if (v > best.value) {
      best.value = v;
      best.phi = phi;
      best_i = i;
    }
  }
  const double lo = h_cons * std::max(best_i - 1, 0) / n_grid;
  const double hi = h_cons * std::min(best_i + 1, n_grid) / n_grid;
  const double phi_star = golden_max(
      [&](double phi) {
        return circle_history_kl_ratio(p, kappa, delta_d, phi);
      },
      std::max(lo, 1e-12), hi, 1e-10);
  const double refined = circle_history_kl_ratio(p, kappa, delta_d, phi_star);
  if (refined > best.value) {
    best.value = refined;
    best.phi = phi_star;
  }
  return best;
}

}  // namespace

CurvatureThreshold curvature_threshold(const ChannelParams& p, double delta_d,
                                       double d_th, double eps_d) {
  p.validate();
  if (!(d_th > 0.0)) {
    throw std::domain_error("curvature_threshold: d_th must be > 0");
  }
  if (!(eps_d > 0.0 && eps_d < 1.0)) {
    throw std::domain_error("curvature_threshold: eps_d must be in (0, 1)");
  }
  const double kappa_cap = (1.0 - 1e-9) / d_th;  // strict domain bound
  auto feasible = [&](double kappa) {
    if (!(kappa < 1.0 / d_th)) return false;  // domain constraint
    return max_ratio_over_phi(p, kappa, delta_d, d_th).value <= eps_d;
  };

  CurvatureThreshold out;
  double kappa_lo = 1e-6 * kappa_cap;
  if (!feasible(kappa_lo)) {
    // Collinear limit: the perturbation vanishes as kappa -> 0, so an
    // infeasible lower end means the tolerance itself is broken.
    throw std::domain_error(
        "curvature_threshold: infeasible even for vanishing curvature");
  }
  if (feasible(kappa_cap)) {
    out.kappa_th = kappa_cap;
  } else {
    double kappa_hi = kappa_cap;
    bool bracket_ok = true;
    for (int it = 0; it < 80 && kappa_hi - kappa_lo > 1e-12 / d_th; ++it) {
      // Re-verify the bracket each iteration; the feasibility set is not
      // proven monotone in kappa.
      if (!feasible(kappa_lo) || feasible(kappa_hi)) {
        bracket_ok = false;
        break;
      }
      const double mid = 0.5 * (kappa_lo + kappa_hi);
      (feasible(mid) ? kappa_lo : kappa_hi) = mid;
    }
    if (bracket_ok) {
      out.kappa_th = kappa_lo;
    } else {
      // Dense scan fallback: largest feasible point on a 1024-point grid.
      out.used_dense_scan = true;
      const int n = 1024;
      double best = 0.0;
      for (int i = 1; i <= n; ++i) {
        const double kappa = kappa_cap * i / n;
        if (feasible(kappa)) best = kappa;
      }
      if (best == 0.0) {
        throw std::domain_error(
            "curvature_threshold: no feasible curvature found");
      }
      out.kappa_th = best;
    }
  }
  out.max_h_opt = max_ratio_over_phi(p, out.kappa_th, delta_d, d_th).value;
  out.feasible_at_kappa_th = feasible(out.kappa_th);
  out.feasible_at_1_05_kappa_th = feasible(1.05 * out.kappa_th);
  return out;
}

KlStats kl_stats_for_circle(const ChannelParams& p, double kappa,
                            double delta_d, double d_th) {
  p.validate();
  if (!(kappa > 0.0) || !(kappa < 1.0 / d_th)) {
    throw std::domain_error("kl_stats_for_circle: requires 0 < kappa < 1/d_th");
  }
  const PhiMax best = max_ratio_over_phi(p, kappa, delta_d, d_th);
  if (best.value == 0.0) {
    return KlStats{};  // no admissible history inside the ball
  }
  const double r = 1.0 / kappa;
  const double dphi = 2.0 * std::asin(0.5 * kappa * delta_d);
  const double d1 = 2.0 * r * std::sin(0.5 * dphi);
  const double d1r = 2.0 * r * std::sin(0.5 * best.phi);
  const double dr = 2.0 * r * std::sin(0.5 * (best.phi + dphi));
  return three_point_kl(p, d1, dr, d1r);
}

Certification certify_path(const DiscretizedPath& path, const ChannelParams& p,
                           double eps_m, double eps_sigma) {
  path.validate();
  Certification cert;
  cert.tol.eps_m = eps_m;
  cert.tol.eps_sigma = eps_sigma;
  cert.tol.eps_d = markov_eps_d(eps_m, eps_sigma);
  cert.tol.d_th = ball_radius(p, path.delta_d, eps_m, eps_sigma);
  const CurvatureThreshold ct =
      curvature_threshold(p, path.delta_d, cert.tol.d_th, cert.tol.eps_d);
  cert.tol.kappa_th = ct.kappa_th;
  const CurvatureProfile prof = curvature_profile(path);
  cert.kappa_max = prof.kappa_max;
  cert.curvature_ok = cert.kappa_max < cert.tol.kappa_th;
  cert.loop = is_dth_loop_free(path, cert.tol.d_th, cert.kappa_max);
  cert.certified = cert.curvature_ok && cert.loop.loop_free;
  cert.margin = cert.tol.kappa_th - cert.kappa_max;
  return cert;
}

}  // namespace fpd
