#pragma once

// Marching solver for the second-kind Volterra integral equation whose
// solution is the first-passage-distance density of the channel power to the
// connectivity threshold: fixed-start form and the epsilon-upcrossing form
// (start conditioned below gamma_th - epsilon). Multipath excluded here.

#include <Eigen/Dense>
#include <vector>

#include "fpd/channel.hpp"
#include "fpd/types.hpp"

namespace fpd {

struct VolterraGrid {
  double d_max = 0.0;   // horizon, m
  int n_steps = 0;      // even, > 0
  double h = 0.0;       // step = d_max / n_steps
  std::vector<double> distances;  // n_steps + 1 nodes from 0 to d_max
};

/// Build a uniform grid; n_steps must be even (composite-Simpson pairing).
VolterraGrid make_volterra_grid(double d_max, int n_steps);

struct FpdDensity {
  std::vector<double> distances;  // m
  std::vector<double> pdf;        // per meter
  std::vector<double> cdf;        // cumulative trapezoid of pdf
  double total_mass = 0.0;        // cdf at d_max
};

struct DriftDiffusion {
  double a = 0.0;  // dB/m
  double b = 0.0;  // dB^2/m
};

/// Local drift and diffusion of the channel power seen as a diffusion in
/// travel distance: a = gamma_pl_prime - (gamma - gamma_pl)/beta,
/// b = 2 sigma_sh_sq / beta.
DriftDiffusion drift_diffusion(const ChannelParams& p, double gamma,
                               double gamma_pl, double gamma_pl_prime);

/// Threshold-level probability-flux kernel Psi(d | eta, l): the flux of the
/// transition law started at power eta at distance l, evaluated at the
/// threshold at distance d. Requires d > l >= 0. Evaluated in a
/// cancellation-free form; the value vanishes like sqrt(d - l) toward the
/// diagonal, which the solver exploits (diagonal entries are exactly 0).
double psi_kernel(const ChannelParams& p, const PathLossTable& table, double d,
                  double eta, double l);

/// Forcing term of the upcrossing form: threshold flux of the law started
/// from the stationary marginal truncated below gamma_th - eps. Requires
/// d > 0 and eps > 0; throws if the conditioning probability underflows.
double psi_u_kernel(const ChannelParams& p, const PathLossTable& table,
                    double d, double eps);

/// Lower-triangular matrix K(k, j) = Psi(d_k | gamma_th, d_j), j < k, shared
/// by every forcing on the same grid. kernel_sign = -1 is a test-only
/// negative-control hook (flips the kernel so validation gates must fail).
Eigen::MatrixXd volterra_kernel_matrix(const ChannelParams& p,
                                       const PathLossTable& table,
                                       const VolterraGrid& grid,
                                       int kernel_sign = 1);

/// March the explicit composite-Simpson scheme (trapezoid closes odd rows)
/// for g = -2*forcing + 2 * integral(K g): forcing holds Psi at each node.
FpdDensity solve_with_kernel(const std::vector<double>& forcing,
                             const Eigen::MatrixXd& kernel,
                             const VolterraGrid& grid);

/// First-passage density for a fixed starting power gamma0 < gamma_th.
FpdDensity solve_fpd(const ChannelParams& p, const PathLossTable& table,
                     double gamma0, const VolterraGrid& grid,
                     int kernel_sign = 1);

/// Epsilon-upcrossing first-passage density (start below gamma_th - eps).
FpdDensity solve_upcrossing_fpd(const ChannelParams& p,
                                const PathLossTable& table, double eps,
                                const VolterraGrid& grid, int kernel_sign = 1);

}  // namespace fpd
