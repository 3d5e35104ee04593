#include "fpd/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "fpd/math.hpp"

namespace fpd {

namespace {
constexpr double kLogArgFloor = 1e-12;  // m^2; below this the geometry is
                                        // degenerate (robot at the operator)
}

void ChannelParams::validate() const {
  if (!(sigma_sh_sq > 0.0)) {
    throw std::invalid_argument("ChannelParams: sigma_sh_sq must be > 0");
  }
  if (!(beta_sh > 0.0)) {
    throw std::invalid_argument("ChannelParams: beta_sh must be > 0");
  }
  if (!(n_pl > 0.0)) {
    throw std::invalid_argument("ChannelParams: n_pl must be > 0");
  }
  if (multipath && !(multipath->k_ric >= 0.0)) {
    throw std::invalid_argument("ChannelParams: k_ric must be >= 0");
  }
}

void StraightGeometry::validate() const {
  if (!(d_src > 0.0)) {
    throw std::invalid_argument("StraightGeometry: d_src must be > 0");
  }
  if (!(theta_src >= 0.0 && theta_src < 2.0 * kPi)) {
    throw std::invalid_argument(
        "StraightGeometry: theta_src must be in [0, 2*pi)");
  }
}

double path_loss_straight(const ChannelParams& p, const StraightGeometry& g,
                          double d) {
  const double arg =
      g.d_src * g.d_src + d * d - 2.0 * g.d_src * d * std::cos(g.theta_src);
  if (!(arg > kLogArgFloor)) {
    throw std::domain_error(
        "path_loss_straight: degenerate geometry (robot at the operator)");
  }
  return p.k_db - 5.0 * p.n_pl * std::log10(arg);
}

double path_loss_derivative(const ChannelParams& p, const StraightGeometry& g,
                            double d) {
  const double c = std::cos(g.theta_src);
  const double arg = g.d_src * g.d_src + d * d - 2.0 * g.d_src * d * c;
  if (!(arg > kLogArgFloor)) {
    throw std::domain_error(
        "path_loss_derivative: degenerate geometry (robot at the operator)");
  }
  return -10.0 * p.n_pl * std::log10(std::exp(1.0)) * (d - g.d_src * c) / arg;
}

double shadowing_cov(const ChannelParams& p, double dist) {
  if (dist < 0.0) throw std::domain_error("shadowing_cov: negative distance");
  return p.sigma_sh_sq * std::exp(-dist / p.beta_sh);
}

TransitionMoments transition_moments(const ChannelParams& p, double gamma_pl_l,
                                     double gamma_pl_d, double eta,
                                     double gap) {
  if (gap < 0.0) throw std::domain_error("transition_moments: negative gap");
  const double r = std::exp(-gap / p.beta_sh);
  return {gamma_pl_d + r * (eta - gamma_pl_l),
          p.sigma_sh_sq * (-std::expm1(-2.0 * gap / p.beta_sh))};
}

double marginal_pdf(const ChannelParams& p, double gamma_pl_d, double gamma) {
  const double sigma = p.sigma_sh();
  return normal_pdf((gamma - gamma_pl_d) / sigma) / sigma;
}

namespace {

double table_lookup(const std::vector<double>& s, const std::vector<double>& v,
                    double d) {
  if (s.empty()) throw std::logic_error("PathLossTable: empty table");
  if (d <= s.front()) return v.front();
  if (d >= s.back()) return v.back();
  const double h = s[1] - s[0];
  const std::size_t i =
      std::min(static_cast<std::size_t>((d - s.front()) / h), s.size() - 2);
  const double t = (d - s[i]) / (s[i + 1] - s[i]);
  return (1.0 - t) * v[i] + t * v[i + 1];
}

}  // namespace

double PathLossTable::value_at(double d) const {
  return table_lookup(s, value, d);
}

double PathLossTable::deriv_at(double d) const {
  return table_lookup(s, deriv, d);
}

PathLossTable path_loss_along_path(const ChannelParams& p,
                                   const DiscretizedPath& path) {
  path.validate();
  const std::size_t n = path.points.size();
  PathLossTable t;
  t.s = path.cumulative_s;
  t.value.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dist_sq = path.points[i].squaredNorm();
    if (!(dist_sq > kLogArgFloor)) {
      throw std::domain_error(
          "path_loss_along_path: path point at the operator");
    }
    t.value[i] = p.k_db - 5.0 * p.n_pl * std::log10(dist_sq);
  }
  t.deriv.resize(n);
  const double h = path.delta_d;
  t.deriv[0] = (t.value[1] - t.value[0]) / h;
  t.deriv[n - 1] = (t.value[n - 1] - t.value[n - 2]) / h;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    t.deriv[i] = (t.value[i + 1] - t.value[i - 1]) / (2.0 * h);
  }
  return t;
}

PathLossTable path_loss_table_straight(const ChannelParams& p,
                                       const StraightGeometry& g,
                                       const std::vector<double>& distances) {
  PathLossTable t;
  t.s = distances;
  t.value.reserve(distances.size());
  t.deriv.reserve(distances.size());
  for (double d : distances) {
    t.value.push_back(path_loss_straight(p, g, d));
    t.deriv.push_back(path_loss_derivative(p, g, d));
  }
  return t;
}

}  // namespace fpd
