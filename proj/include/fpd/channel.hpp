#pragma once

// Closed-form channel quantities: path loss along straight and general
// paths, shadowing covariance, Gauss-Markov transition moments, and the
// stationary marginal density.

#include <vector>

#include "fpd/path.hpp"
#include "fpd/types.hpp"

namespace fpd {

/// Path loss at travel distance d along a straight trajectory:
/// k_db - 5 n_pl log10(d_src^2 + d^2 - 2 d_src d cos(theta_src)).
double path_loss_straight(const ChannelParams& p, const StraightGeometry& g,
                          double d);

/// Closed-form derivative of path_loss_straight with respect to d, dB/m.
double path_loss_derivative(const ChannelParams& p, const StraightGeometry& g,
                            double d);

/// Shadowing covariance at Euclidean separation dist: sigma_sh_sq *
/// exp(-dist / beta_sh).
double shadowing_cov(const ChannelParams& p, double dist);

struct TransitionMoments {
  double mean = 0.0;  // dB
  double var = 0.0;   // dB^2
};

/// Conditional mean/variance of the channel power at travel distance d given
/// power eta at an earlier point l, gap = d - l meters of travel:
/// mean = gamma_pl_d + e^{-gap/beta} (eta - gamma_pl_l),
/// var  = sigma_sh_sq (1 - e^{-2 gap/beta}).
TransitionMoments transition_moments(const ChannelParams& p, double gamma_pl_l,
                                     double gamma_pl_d, double eta,
                                     double gap);

/// Stationary marginal density of the channel power at a point with path
/// loss gamma_pl_d: Gaussian with that mean and variance sigma_sh_sq.
double marginal_pdf(const ChannelParams& p, double gamma_pl_d, double gamma);

/// Path loss and its arc-length derivative tabulated on a uniform distance
/// grid; lookups linearly interpolate between nodes.
struct PathLossTable {
  std::vector<double> s;      // travel distance, uniform grid
  std::vector<double> value;  // gamma_PL(s), dB
  std::vector<double> deriv;  // d gamma_PL / ds, dB/m

  double value_at(double d) const;
  double deriv_at(double d) const;
};

/// Point-form path loss k_db - 10 n_pl log10(|q|) at every node of a
/// discretized path, with central-difference derivatives along arc length
/// (one-sided at the endpoints).
PathLossTable path_loss_along_path(const ChannelParams& p,
                                   const DiscretizedPath& path);

/// Closed-form table for a straight trajectory evaluated at the given travel
/// distances (uniform grid expected).
PathLossTable path_loss_table_straight(const ChannelParams& p,
                                       const StraightGeometry& g,
                                       const std::vector<double>& distances);

}  // namespace fpd
