#include "fpd/volterra.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fpd/math.hpp"

namespace fpd {
namespace {

// Row-by-row explicit marching for g = -2*forcing + 2*integral(K g) on a
// uniform grid. Quadrature per row: composite Simpson when the row index is
// even, Simpson up to the previous node plus a trapezoid panel when odd
// (row 1 is pure trapezoid). The kernel vanishes toward the diagonal like
// sqrt(d - l), so the diagonal weight never contributes and is skipped.
FpdDensity march(const VolterraGrid& grid,
                 const std::function<double(int, int)>& kernel_at,
                 const std::vector<double>& forcing) {
  const int n = grid.n_steps;
  const double h = grid.h;
  std::vector<double> g(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 1; k <= n; ++k) {
    double acc = 0.0;
    if (k >= 2) {
      if (k % 2 == 0) {
        double simpson = 0.0;
        for (int j = 1; j < k; ++j) {
          const double w = (j % 2 == 1) ? 4.0 : 2.0;
          simpson += w * kernel_at(k, j) * g[j];
        }
        acc = (h / 3.0) * simpson;
      } else {
        double simpson = 0.0;
        for (int j = 1; j < k - 1; ++j) {
          const double w = (j % 2 == 1) ? 4.0 : 2.0;
          simpson += w * kernel_at(k, j) * g[j];
        }
        const double last = kernel_at(k, k - 1) * g[k - 1];
        acc = (h / 3.0) * (simpson + last) + (h / 2.0) * last;
      }
    }
    g[k] = -2.0 * forcing[static_cast<std::size_t>(k)] + 2.0 * acc;
    if (!(std::abs(g[k]) <= 1e3)) {
      throw std::runtime_error(
          "first-passage marching diverged; refine the grid or check the "
          "channel parameters");
    }
  }

  for (double& v : g) {
    if (v < -1e-8) {
      throw std::runtime_error(
          "first-passage density turned negative beyond roundoff; marching "
          "is unstable for these parameters");
    }
    if (v < 0.0) v = 0.0;
  }

  FpdDensity out;
  out.distances = grid.distances;
  out.pdf = std::move(g);
  out.cdf = cumtrapz(out.pdf, h);
  out.total_mass = out.cdf.back();
  if (out.total_mass > 1.0 + 1e-6) {
    throw std::runtime_error(
        "first-passage mass exceeds one; marching is inaccurate at this "
        "step size");
  }
  return out;
}

std::vector<double> upcrossing_forcing(const ChannelParams& p,
                                       const PathLossTable& table, double eps,
                                       const VolterraGrid& grid) {
  std::vector<double> forcing(grid.distances.size(), 0.0);
  for (int k = 1; k <= grid.n_steps; ++k) {
    forcing[static_cast<std::size_t>(k)] =
        psi_u_kernel(p, table, grid.distances[static_cast<std::size_t>(k)],
                     eps);
  }
  return forcing;
}

}  // namespace

VolterraGrid make_volterra_grid(double d_max, int n_steps) {
  if (!(d_max > 0.0)) {
    throw std::invalid_argument("horizon must be positive");
  }
  if (n_steps < 2 || n_steps % 2 != 0) {
    throw std::invalid_argument("step count must be even and at least 2");
  }
  VolterraGrid grid;
  grid.d_max = d_max;
  grid.n_steps = n_steps;
  grid.h = d_max / n_steps;
  grid.distances.resize(static_cast<std::size_t>(n_steps) + 1);
  for (int i = 0; i <= n_steps; ++i) {
    grid.distances[static_cast<std::size_t>(i)] = grid.h * i;
  }
  grid.distances.back() = d_max;
  return grid;
}

DriftDiffusion drift_diffusion(const ChannelParams& p, double gamma,
                               double gamma_pl, double gamma_pl_prime) {
  DriftDiffusion dd;
  dd.a = gamma_pl_prime - (gamma - gamma_pl) / p.beta_sh;
  dd.b = 2.0 * p.sigma_sh_sq / p.beta_sh;
  return dd;
}

double psi_kernel(const ChannelParams& p, const PathLossTable& table, double d,
                  double eta, double l) {
  if (!(d > l) || !(l >= 0.0)) {
    throw std::invalid_argument(
        "flux kernel requires 0 <= source distance < evaluation distance");
  }
  const double beta = p.beta_sh;
  const double x = (d - l) / beta;
  const double gamma_pl_d = table.value_at(d);
  const double gamma_pl_l = table.value_at(l);
  const double big_a = p.gamma_th - gamma_pl_d;
  const double big_b = eta - gamma_pl_l;
  // a_minus_b = big_a - big_b regrouped so the path-loss difference (small,
  // well-conditioned) never rides on the large absolute dB levels.
  const double a_minus_b = (gamma_pl_l - gamma_pl_d) + (p.gamma_th - eta);

  double bracket;
  if (x > 40.0) {
    bracket = -0.5 * table.deriv_at(d) - big_a / (2.0 * beta);
  } else {
    const double sh_half = std::sinh(0.5 * x);
    bracket = -0.5 * table.deriv_at(d) -
              (big_a * 2.0 * sh_half * sh_half + a_minus_b) /
                  (2.0 * beta * std::sinh(x));
  }

  const double rho = std::exp(-x);
  const double var = p.sigma_sh_sq * (-std::expm1(-2.0 * x));
  const double sd = std::sqrt(var);
  const double f = normal_pdf((big_a - rho * big_b) / sd) / sd;
  return bracket * f;
}

double psi_u_kernel(const ChannelParams& p, const PathLossTable& table,
                    double d, double eps) {
  if (!(d > 0.0)) {
    throw std::invalid_argument(
        "upcrossing forcing requires a positive distance");
  }
  if (!(eps > 0.0)) {
    throw std::invalid_argument("upcrossing margin must be positive");
  }
  const double sigma = p.sigma_sh();
  const double beta = p.beta_sh;
  const double r = std::exp(-d / beta);
  const double var = p.sigma_sh_sq * (-std::expm1(-2.0 * d / beta));
  const double sd = std::sqrt(var);
  const double y = p.gamma_th - table.value_at(d);
  const double a = p.gamma_th - eps - table.value_at(0.0);
  const double p0 = normal_cdf(a / sigma);
  if (p0 < 1e-12) {
    throw std::domain_error(
        "probability of starting below the threshold margin underflows; the "
        "start point is effectively always connected");
  }
  // Flux of the start-conditioned law at the threshold, in closed form:
  // marginal at d times the drift half plus the boundary correction from the
  // truncated start.
  const double f_y = normal_pdf(y / sigma) / sigma;
  const double f_a = normal_pdf(a / sigma) / sigma;
  const double f_trans = normal_pdf((y - r * a) / sd) / sd;
  const double tail = normal_cdf((a - r * y) / sd);
  const double drift_half = 0.5 * (-table.deriv_at(d) - y / beta);
  return (f_y * drift_half * tail -
          (p.sigma_sh_sq / beta) * r * f_a * f_trans) /
         p0;
}

Eigen::MatrixXd volterra_kernel_matrix(const ChannelParams& p,
                                       const PathLossTable& table,
                                       const VolterraGrid& grid,
                                       int kernel_sign) {
  const int m = grid.n_steps + 1;
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(m, m);
  for (int k = 2; k < m; ++k) {
    for (int j = 1; j < k; ++j) {
      kernel(k, j) =
          kernel_sign *
          psi_kernel(p, table, grid.distances[static_cast<std::size_t>(k)],
                     p.gamma_th, grid.distances[static_cast<std::size_t>(j)]);
    }
  }
  return kernel;
}

FpdDensity solve_with_kernel(const std::vector<double>& forcing,
                             const Eigen::MatrixXd& kernel,
                             const VolterraGrid& grid) {
  const int m = grid.n_steps + 1;
  if (static_cast<int>(forcing.size()) != m || kernel.rows() != m ||
      kernel.cols() != m) {
    throw std::invalid_argument(
        "forcing and kernel dimensions must match the grid");
  }
  return march(
      grid, [&kernel](int k, int j) { return kernel(k, j); }, forcing);
}

FpdDensity solve_fpd(const ChannelParams& p, const PathLossTable& table,
                     double gamma0, const VolterraGrid& grid,
                     int kernel_sign) {
  p.validate();
  if (!(gamma0 < p.gamma_th)) {
    throw std::invalid_argument(
        "starting power must lie below the connectivity threshold");
  }
  std::vector<double> forcing(grid.distances.size(), 0.0);
  for (int k = 1; k <= grid.n_steps; ++k) {
    forcing[static_cast<std::size_t>(k)] = psi_kernel(
        p, table, grid.distances[static_cast<std::size_t>(k)], gamma0, 0.0);
  }
  const auto kernel_at = [&](int k, int j) {
    return kernel_sign *
           psi_kernel(p, table, grid.distances[static_cast<std::size_t>(k)],
                      p.gamma_th, grid.distances[static_cast<std::size_t>(j)]);
  };
  return march(grid, kernel_at, forcing);
}

FpdDensity solve_upcrossing_fpd(const ChannelParams& p,
                                const PathLossTable& table, double eps,
                                const VolterraGrid& grid, int kernel_sign) {
  p.validate();
  const std::vector<double> forcing = upcrossing_forcing(p, table, eps, grid);
  const auto kernel_at = [&](int k, int j) {
    return kernel_sign *
           psi_kernel(p, table, grid.distances[static_cast<std::size_t>(k)],
                      p.gamma_th, grid.distances[static_cast<std::size_t>(j)]);
  };
  return march(grid, kernel_at, forcing);
}

}  // namespace fpd
