#include "fpd/multipath.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fpd/math.hpp"

namespace fpd {
namespace {

int next_pow2(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

void check_edge_mass(const std::vector<double>& values, const GammaGrid& g) {
  const double total = trapezoid(values, g.dgamma);
  if (total <= 0.0) return;
  const double edge = (values.front() + values.back()) * g.dgamma;
  if (edge > 1e-8 * total) {
    throw std::runtime_error(
        "shadowing density reached the grid edges; widen the grid span");
  }
}

}  // namespace

GammaGrid make_gamma_grid(double sigma, int m, double c) {
  if (!(sigma > 0.0) || !(c > 0.0)) {
    throw std::invalid_argument("grid span requires positive sigma and c");
  }
  if (m < 8) {
    throw std::invalid_argument("grid needs at least 8 nodes");
  }
  GammaGrid g;
  g.gamma_min = -c * sigma;
  g.dgamma = 2.0 * c * sigma / (m - 1);
  g.m = m;
  return g;
}

double GridFunction::integral() const {
  return trapezoid(values, grid.dgamma);
}

GridFunction init_j0(const ChannelParams& p, const MultipathCdf& mp,
                     double gamma_pl_0, const GammaGrid& grid) {
  const double sigma = p.sigma_sh();
  GridFunction j0;
  j0.grid = grid;
  j0.values.resize(static_cast<std::size_t>(grid.m));
  for (int i = 0; i < grid.m; ++i) {
    const double g = grid.at(i);
    j0.values[static_cast<std::size_t>(i)] =
        mp(p.gamma_th - gamma_pl_0 - g) * normal_pdf(g / sigma) / sigma;
  }
  return j0;
}

RecursionEngine::RecursionEngine(const ChannelParams& p,
                                 const MultipathCdf& mp, const GammaGrid& grid,
                                 double delta_d)
    : p_(p), mp_(mp), grid_(grid) {
  if (!(delta_d > 0.0)) {
    throw std::invalid_argument("step length must be positive");
  }
  const double x = delta_d / p.beta_sh;
  rho_ = std::exp(-x);
  sigma_step_ = p.sigma_sh() * std::sqrt(-std::expm1(-2.0 * x));
  if (sigma_step_ < 1.5 * grid.dgamma) {
    throw std::runtime_error(
        "innovation kernel narrower than the grid resolves; enlarge the "
        "step or refine the grid");
  }

  const int j_half = std::min(
      grid.m - 1,
      static_cast<int>(std::ceil(12.0 * sigma_step_ / grid.dgamma)));
  pad_size_ = next_pow2(grid.m + j_half + 1);

  // Innovation kernel sampled at node spacing, stored wrapped for circular
  // convolution (tap t at index t, tap -t at pad_size - t).
  std::vector<std::complex<double>> kernel_time(
      static_cast<std::size_t>(pad_size_), 0.0);
  for (int t = 0; t <= j_half; ++t) {
    const double w = grid.dgamma *
                     normal_pdf(t * grid.dgamma / sigma_step_) / sigma_step_;
    kernel_time[static_cast<std::size_t>(t)] = w;
    if (t > 0) kernel_time[static_cast<std::size_t>(pad_size_ - t)] = w;
  }
  fft_.fwd(kernel_freq_, kernel_time);
  time_buf_.assign(static_cast<std::size_t>(pad_size_), 0.0);
  freq_buf_.assign(static_cast<std::size_t>(pad_size_), 0.0);
}

GridFunction RecursionEngine::step(const GridFunction& j_prev,
                                   double gamma_pl_next) {
  if (j_prev.grid.m != grid_.m) {
    throw std::invalid_argument("grid mismatch in recursion step");
  }
  const int m = grid_.m;

  // Rescale by the correlation: the propagated state is rho * previous state
  // plus the innovation, so the previous density enters as J(u / rho) / rho.
  std::fill(time_buf_.begin(), time_buf_.end(), std::complex<double>(0.0));
  for (int i = 0; i < m; ++i) {
    const double u = grid_.at(i) / rho_;
    const double v = cubic4_interp(j_prev.values, grid_.gamma_min,
                                   grid_.dgamma, u, 0.0) /
                     rho_;
    time_buf_[static_cast<std::size_t>(i)] = std::max(v, 0.0);
  }

  fft_.fwd(freq_buf_, time_buf_);
  for (int i = 0; i < pad_size_; ++i) {
    freq_buf_[static_cast<std::size_t>(i)] *=
        kernel_freq_[static_cast<std::size_t>(i)];
  }
  fft_.inv(time_buf_, freq_buf_);

  GridFunction out;
  out.grid = grid_;
  out.values.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    out.values[static_cast<std::size_t>(i)] =
        std::max(time_buf_[static_cast<std::size_t>(i)].real(), 0.0);
  }
  check_edge_mass(out.values, grid_);

  for (int i = 0; i < m; ++i) {
    out.values[static_cast<std::size_t>(i)] *=
        mp_(p_.gamma_th - gamma_pl_next - grid_.at(i));
  }
  return out;
}

GridFunction recursion_step(const ChannelParams& p, const MultipathCdf& mp,
                            const GridFunction& j_prev, double gamma_pl_next,
                            double delta_d) {
  RecursionEngine engine(p, mp, j_prev.grid, delta_d);
  return engine.step(j_prev, gamma_pl_next);
}

SurvivalSequence survival_probability(const ChannelParams& p,
                                      const MultipathCdf& mp,
                                      const std::vector<double>& gamma_pl,
                                      double delta_d, const GammaGrid& grid) {
  if (gamma_pl.empty()) {
    throw std::invalid_argument("need at least the starting node");
  }
  const int n = static_cast<int>(gamma_pl.size()) - 1;
  SurvivalSequence s;
  s.joint.resize(gamma_pl.size(), 0.0);
  s.conditional.resize(gamma_pl.size(), 0.0);

  GridFunction j = init_j0(p, mp, gamma_pl[0], grid);
  s.joint[0] = j.integral();
  if (s.joint[0] < 1e-12) {
    throw std::domain_error(
        "start point is almost surely already connected; first-passage "
        "conditioning is undefined");
  }

  if (n >= 1) {
    RecursionEngine engine(p, mp, grid, delta_d);
    for (int k = 1; k <= n; ++k) {
      j = engine.step(j, gamma_pl[static_cast<std::size_t>(k)]);
      const double mass =
          std::min(j.integral(), s.joint[static_cast<std::size_t>(k) - 1]);
      s.joint[static_cast<std::size_t>(k)] = mass;
      if (mass < 1e-12) {
        s.truncated_at = k;
        for (int r = k + 1; r <= n; ++r) {
          s.joint[static_cast<std::size_t>(r)] = mass;
        }
        break;
      }
    }
  }

  for (std::size_t k = 0; k < s.joint.size(); ++k) {
    s.conditional[k] = s.joint[k] / s.joint[0];
  }
  return s;
}

double expected_first_passage(const FirstPassagePmf& pmf) {
  if (pmf.distances.empty()) {
    throw std::invalid_argument("empty first-passage distribution");
  }
  double e = pmf.distances.back() * pmf.residual;
  for (std::size_t k = 0; k < pmf.distances.size(); ++k) {
    e += pmf.distances[k] * pmf.pmf[k];
  }
  return e;
}

FirstPassagePmf first_passage_pmf(const SurvivalSequence& s, double delta_d) {
  if (s.conditional.empty()) {
    throw std::invalid_argument("empty survival sequence");
  }
  FirstPassagePmf out;
  const std::size_t n = s.conditional.size() - 1;
  out.distances.resize(n);
  out.pmf.resize(n);
  for (std::size_t k = 1; k <= n; ++k) {
    out.distances[k - 1] = delta_d * static_cast<double>(k);
    out.pmf[k - 1] = s.conditional[k - 1] - s.conditional[k];
  }
  out.residual = s.conditional.back();
  return out;
}

}  // namespace fpd
