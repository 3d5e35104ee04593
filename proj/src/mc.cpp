#include "fpd/mc.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "fpd/channel.hpp"
#include "fpd/math.hpp"

namespace fpd {
namespace {

constexpr std::size_t kMaxFactorizationPoints = 20000;

Eigen::MatrixXd shadowing_cholesky(const DiscretizedPath& path,
                                   const ChannelParams& p, int n_nodes) {
  if (static_cast<std::size_t>(n_nodes) > kMaxFactorizationPoints) {
    throw std::invalid_argument(
        "joint shadowing factorization limited to 20000 points");
  }
  Eigen::MatrixXd sigma(n_nodes, n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    sigma(i, i) = p.sigma_sh_sq;
    for (int j = 0; j < i; ++j) {
      const double dist = (path.points[static_cast<std::size_t>(i)] -
                           path.points[static_cast<std::size_t>(j)])
                              .norm();
      if (dist < 1e-9) {
        throw std::invalid_argument(
            "coincident path points make the shadowing covariance singular");
      }
      sigma(i, j) = sigma(j, i) = p.sigma_sh_sq * std::exp(-dist / p.beta_sh);
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    sigma.diagonal().array() += 1e-10 * p.sigma_sh_sq;
    llt.compute(sigma);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error(
          "shadowing covariance is numerically non-positive-definite even "
          "after jitter");
    }
  }
  return llt.matrixL();
}

struct RicianDraw {
  double nu = 0.0;  // line-of-sight amplitude
  double s = 0.0;   // scattered-component scale per real dimension
};

RicianDraw rician_draw_params(double k_ric) {
  if (k_ric < 0.0) {
    throw std::invalid_argument("rician factor must be nonnegative");
  }
  RicianDraw d;
  d.nu = std::sqrt(k_ric / (1.0 + k_ric));
  d.s = std::sqrt(1.0 / (2.0 * (1.0 + k_ric)));
  return d;
}

double multipath_db_from(NormalStream& stream, const RicianDraw& r) {
  const double x = stream.next();
  const double y = stream.next();
  const double z = (r.nu + r.s * x) * (r.nu + r.s * x) + (r.s * y) * (r.s * y);
  return 10.0 * std::log10(z);
}

void validate_config(const ChannelParams& p, const McConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("need at least one trial");
  if (cfg.horizon_steps < 1) {
    throw std::invalid_argument("horizon must cover at least one step");
  }
  if (cfg.batch < 1) throw std::invalid_argument("batch must be positive");
  if (cfg.conditioning == Conditioning::fixed_start) {
    if (p.multipath) {
      throw std::invalid_argument(
          "fixed-start conditioning pins the shadowing and is only defined "
          "without multipath");
    }
    if (!(cfg.gamma0 < p.gamma_th)) {
      throw std::invalid_argument(
          "fixed start power must lie below the threshold");
    }
  }
  if (cfg.conditioning == Conditioning::below_threshold_minus_eps &&
      !(cfg.eps > 0.0)) {
    throw std::invalid_argument("conditioning margin must be positive");
  }
}

EmpiricalFpd run_trials(const DiscretizedPath& path, const ChannelParams& p,
                        const McConfig& cfg, bool exact_covariance) {
  p.validate();
  path.validate();
  validate_config(p, cfg);
  const int n_nodes = cfg.horizon_steps + 1;
  if (static_cast<std::size_t>(n_nodes) > path.points.size()) {
    throw std::invalid_argument("path shorter than the trial horizon");
  }

  const std::vector<double> gamma_pl = path_loss_along_path(p, path).value;
  const bool mp = p.multipath.has_value();
  const RicianDraw rd =
      mp ? rician_draw_params(p.multipath->k_ric) : RicianDraw{};

  Eigen::MatrixXd chol;
  double rho = 0.0, sigma_step = 0.0;
  if (exact_covariance) {
    chol = shadowing_cholesky(path, p, n_nodes);
  } else {
    const double x = path.delta_d / p.beta_sh;
    rho = std::exp(-x);
    sigma_step = p.sigma_sh() * std::sqrt(-std::expm1(-2.0 * x));
  }
  const double sigma = p.sigma_sh();
  const double pinned_state =
      cfg.conditioning == Conditioning::fixed_start ? cfg.gamma0 - gamma_pl[0]
                                                    : 0.0;

  EmpiricalFpd out;
  out.delta_d = path.delta_d;
  out.crossing_steps.reserve(cfg.trials);
  std::vector<double> raw_distances;
  raw_distances.reserve(cfg.trials);

  const int batch = cfg.batch;
  Eigen::MatrixXd z(n_nodes, batch);
  Eigen::MatrixXd omega(n_nodes, batch);
  Eigen::MatrixXd mp_db(mp ? n_nodes : 0, mp ? batch : 0);

  std::size_t attempts = 0;
  std::size_t accepted = 0;
  const double attempt_cap =
      std::max(20000.0, static_cast<double>(cfg.trials) *
                            std::max(cfg.max_attempt_factor, 1.0));

  while (accepted < cfg.trials) {
    for (int c = 0; c < batch; ++c) {
      NormalStream stream(derive_seed(cfg.seed, attempts + c));
      for (int k = 0; k < n_nodes; ++k) z(k, c) = stream.next();
      if (cfg.conditioning == Conditioning::fixed_start) {
        z(0, c) = pinned_state / sigma;
      }
      if (mp) {
        for (int k = 0; k < n_nodes; ++k) {
          mp_db(k, c) = multipath_db_from(stream, rd);
        }
      }
    }
    if (exact_covariance) {
      omega.noalias() = chol.triangularView<Eigen::Lower>() * z;
    } else {
      for (int c = 0; c < batch; ++c) {
        omega(0, c) = sigma * z(0, c);
        for (int k = 1; k < n_nodes; ++k) {
          omega(k, c) = rho * omega(k - 1, c) + sigma_step * z(k, c);
        }
      }
    }

    for (int c = 0; c < batch && accepted < cfg.trials; ++c) {
      const double g0 = gamma_pl[0] + omega(0, c) + (mp ? mp_db(0, c) : 0.0);
      bool keep = true;
      switch (cfg.conditioning) {
        case Conditioning::none:
        case Conditioning::fixed_start:
          break;
        case Conditioning::below_threshold:
          keep = g0 < p.gamma_th;
          break;
        case Conditioning::below_threshold_minus_eps:
          keep = g0 < p.gamma_th - cfg.eps;
          break;
      }
      if (!keep) continue;

      int step = -1;
      for (int k = 1; k < n_nodes; ++k) {
        const double g = gamma_pl[static_cast<std::size_t>(k)] + omega(k, c) +
                         (mp ? mp_db(k, c) : 0.0);
        if (g >= p.gamma_th) {
          step = k;
          break;
        }
      }
      out.crossing_steps.push_back(step);
      if (step < 0) {
        ++out.censored_count;
      } else {
        raw_distances.push_back(step * path.delta_d);
      }
      if (cfg.record_start_values) out.start_values.push_back(g0);
      ++accepted;
    }

    attempts += static_cast<std::size_t>(batch);
    if (accepted < cfg.trials) {
      if (attempts >= 10000 &&
          static_cast<double>(accepted) < 1e-3 * static_cast<double>(attempts)) {
        throw std::runtime_error(
            "conditioning acceptance rate below 0.1%; rejection sampling "
            "infeasible");
      }
      if (static_cast<double>(attempts) > attempt_cap) {
        throw std::runtime_error(
            "attempt budget exhausted before collecting the requested trials");
      }
    }
  }

  std::sort(raw_distances.begin(), raw_distances.end());
  out.crossing_distances = std::move(raw_distances);
  out.total = cfg.trials;
  return out;
}

}  // namespace

double EmpiricalFpd::cdf_at(double d) const {
  if (total == 0) return 0.0;
  const auto it = std::upper_bound(crossing_distances.begin(),
                                   crossing_distances.end(), d);
  return static_cast<double>(it - crossing_distances.begin()) /
         static_cast<double>(total);
}

std::vector<double> sample_shadowing(const DiscretizedPath& path,
                                     const ChannelParams& p,
                                     std::uint64_t seed) {
  p.validate();
  path.validate();
  const int n = static_cast<int>(path.points.size());
  const Eigen::MatrixXd chol = shadowing_cholesky(path, p, n);
  NormalStream stream(seed);
  Eigen::VectorXd z(n);
  for (int k = 0; k < n; ++k) z(k) = stream.next();
  const Eigen::VectorXd omega = chol.triangularView<Eigen::Lower>() * z;
  return std::vector<double>(omega.data(), omega.data() + n);
}

std::vector<double> sample_multipath_db(double k_ric, std::size_t count,
                                        std::uint64_t seed) {
  const RicianDraw rd = rician_draw_params(k_ric);
  NormalStream stream(seed);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = multipath_db_from(stream, rd);
  }
  return out;
}

EmpiricalFpd empirical_fpd(const DiscretizedPath& path, const ChannelParams& p,
                           const McConfig& cfg) {
  return run_trials(path, p, cfg, /*exact_covariance=*/true);
}

EmpiricalFpd empirical_fpd_ar1(const DiscretizedPath& path,
                               const ChannelParams& p, const McConfig& cfg) {
  return run_trials(path, p, cfg, /*exact_covariance=*/false);
}

double ks_distance(const EmpiricalFpd& emp, const FpdDensity& analytic) {
  double sup = 0.0;
  for (std::size_t k = 0; k < analytic.distances.size(); ++k) {
    sup = std::max(sup, std::abs(emp.cdf_at(analytic.distances[k]) -
                                 analytic.cdf[k]));
  }
  return sup;
}

double ks_distance(const EmpiricalFpd& emp, const FirstPassagePmf& analytic) {
  double sup = 0.0;
  double cdf = 0.0;
  for (std::size_t k = 0; k < analytic.distances.size(); ++k) {
    cdf += analytic.pmf[k];
    sup = std::max(sup, std::abs(emp.cdf_at(analytic.distances[k]) - cdf));
  }
  return sup;
}

double ks_two_sample(const EmpiricalFpd& a, const EmpiricalFpd& b) {
  std::vector<double> xs;
  xs.reserve(a.crossing_distances.size() + b.crossing_distances.size());
  xs.insert(xs.end(), a.crossing_distances.begin(),
            a.crossing_distances.end());
  xs.insert(xs.end(), b.crossing_distances.begin(),
            b.crossing_distances.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  double sup = 0.0;
  for (const double x : xs) {
    sup = std::max(sup, std::abs(a.cdf_at(x) - b.cdf_at(x)));
  }
  return sup;
}

void dump_trials_csv(std::ostream& out, const EmpiricalFpd& emp) {
  out << "trial,crossing_step,crossing_distance_m,censored\n";
  char buf[64];
  for (std::size_t i = 0; i < emp.crossing_steps.size(); ++i) {
    const int step = emp.crossing_steps[i];
    const double dist = step < 0 ? -1.0 : step * emp.delta_d;
    std::snprintf(buf, sizeof(buf), "%.12g", dist);
    out << i << ',' << step << ',' << buf << ',' << (step < 0 ? 1 : 0)
        << '\n';
  }
}

}  // namespace fpd
