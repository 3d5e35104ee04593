#pragma once

// Channel constants and straight-trajectory geometry shared by every module.

#include <cmath>
#include <optional>

namespace fpd {

/// Unit-mean Rician power fading with ratio K between the dominant and the
/// scattered component power.
struct Rician {
  double k_ric = 0.0;
};

/// All channel constants. Power quantities are in dB relative to the
/// transmit power; distances in meters.
struct ChannelParams {
  double k_db = 0.0;          // path-loss intercept, dB
  double n_pl = 4.2;          // path-loss exponent
  double sigma_sh_sq = 8.41;  // shadowing power, dB^2
  double beta_sh = 12.92;     // shadowing decorrelation distance, m
  std::optional<Rician> multipath{};  // empty = no multipath component
  double gamma_th = -110.0;   // connectivity threshold, dB

  double sigma_sh() const { return std::sqrt(sigma_sh_sq); }
  void validate() const;  // throws std::invalid_argument on bad fields
};

/// Straight trajectory: robot starts d_src meters from the operator and
/// travels along a fixed heading; theta_src is the angle at the start point
/// between the direction of travel and the line of sight to the operator.
struct StraightGeometry {
  double d_src = 0.0;      // m, > 0
  double theta_src = 0.0;  // rad, in [0, 2*pi)

  void validate() const;
};

}  // namespace fpd
