#include "fpd/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "fpd/config.hpp"
#include "fpd/markov.hpp"
#include "fpd/mc.hpp"
#include "fpd/multipath.hpp"
#include "fpd/volterra.hpp"

namespace fpd {
namespace {

using ojson = nlohmann::ordered_json;

constexpr double kGridSpanSigmas = 8.0;
constexpr double kKsThreshold = 0.02;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

/// Routes CSV rows to --out when given, the provided stream otherwise.
class CsvSink {
 public:
  CsvSink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) {
        throw ConfigError("cannot open output file '" + path + "'");
      }
      os_ = &file_;
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

std::vector<double> node_path_loss(const PathLossTable& table,
                                   const VolterraGrid& grid) {
  std::vector<double> gamma_pl(grid.distances.size());
  for (std::size_t k = 0; k < grid.distances.size(); ++k) {
    gamma_pl[k] = table.value_at(grid.distances[k]);
  }
  return gamma_pl;
}

int cmd_certify(const RunConfig& cfg, std::ostream& out) {
  const DiscretizedPath path = build_path(cfg);
  const Certification cert =
      certify_path(path, cfg.channel, cfg.eps_m, cfg.eps_sigma);
  ojson j;
  j["certified"] = cert.certified;
  j["d_th_m"] = cert.tol.d_th;
  j["kappa_th_per_m"] = cert.tol.kappa_th;
  j["kappa_max_per_m"] = cert.kappa_max;
  j["margin_per_m"] = cert.margin;
  j["curvature_ok"] = cert.curvature_ok;
  j["loop_free"] = cert.loop.loop_free;
  j["eps_d_nats"] = cert.tol.eps_d;
  if (cert.loop.violation) {
    j["reentry"] = ojson{{"s_early_m", cert.loop.violation->s_early},
                         {"s_late_m", cert.loop.violation->s_late},
                         {"separation_m", cert.loop.violation->separation}};
  } else {
    j["reentry"] = nullptr;
  }
  out << j.dump(2) << "\n";
  return cert.certified ? 0 : 2;
}

int cmd_fpd(const RunConfig& cfg, bool multipath_on, bool force,
            const std::string& out_path, std::ostream& out,
            std::ostream& err) {
  const DiscretizedPath path = build_path(cfg);
  const Certification cert =
      certify_path(path, cfg.channel, cfg.eps_m, cfg.eps_sigma);
  if (!cert.certified && !force) {
    err << "path rejected by the admissibility certification (kappa_max="
        << fmt(cert.kappa_max) << " 1/m vs kappa_th="
        << fmt(cert.tol.kappa_th) << " 1/m, loop_free="
        << (cert.loop.loop_free ? "true" : "false")
        << "); pass --force to compute anyway\n";
    return 2;
  }
  const int n = config_n_steps(cfg, path);
  const VolterraGrid grid = make_volterra_grid(n * cfg.delta_d, n);
  const PathLossTable table = build_table(cfg, path);

  CsvSink sink(out_path, out);
  std::ostream& os = sink.stream();
  os << "distance_m,pdf_per_m,cdf\n";
  if (!multipath_on) {
    const FpdDensity dens =
        solve_upcrossing_fpd(cfg.channel, table, cfg.epsilon, grid);
    for (std::size_t k = 0; k < dens.distances.size(); ++k) {
      os << fmt(dens.distances[k]) << ',' << fmt(dens.pdf[k]) << ','
         << fmt(dens.cdf[k]) << '\n';
    }
  } else {
    if (!cfg.channel.multipath) {
      throw ConfigError(
          "--multipath on requires a channel.multipath block in the config");
    }
    const std::vector<double> gamma_pl = node_path_loss(table, grid);
    const GammaGrid ggrid = make_gamma_grid(cfg.channel.sigma_sh(),
                                            cfg.grid.m_points,
                                            kGridSpanSigmas);
    const MultipathCdf mp = build_multipath_cdf(
        cfg.channel, gamma_pl, kGridSpanSigmas * cfg.channel.sigma_sh());
    const SurvivalSequence surv = survival_probability(
        cfg.channel, mp, gamma_pl, cfg.delta_d, ggrid);
    const FirstPassagePmf pmf = first_passage_pmf(surv, cfg.delta_d);
    os << fmt(0.0) << ',' << fmt(0.0) << ',' << fmt(0.0) << '\n';
    for (std::size_t k = 0; k < pmf.distances.size(); ++k) {
      os << fmt(pmf.distances[k]) << ',' << fmt(pmf.pmf[k] / cfg.delta_d)
         << ',' << fmt(1.0 - surv.conditional[k + 1]) << '\n';
    }
  }
  return 0;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  const DiscretizedPath path = build_path(cfg);
  const int n = config_n_steps(cfg, path);
  const VolterraGrid grid = make_volterra_grid(n * cfg.delta_d, n);
  const PathLossTable table = build_table(cfg, path);

  McConfig mcc;
  mcc.trials = cfg.mc.trials;
  mcc.seed = cfg.mc.seed;
  mcc.horizon_steps = n;

  double ks = 0.0;
  const char* solver = nullptr;
  EmpiricalFpd emp;
  if (cfg.channel.multipath) {
    solver = "multipath_recursion";
    mcc.conditioning = Conditioning::below_threshold;
    const std::vector<double> gamma_pl = node_path_loss(table, grid);
    const GammaGrid ggrid = make_gamma_grid(cfg.channel.sigma_sh(),
                                            cfg.grid.m_points,
                                            kGridSpanSigmas);
    const MultipathCdf mp = build_multipath_cdf(
        cfg.channel, gamma_pl, kGridSpanSigmas * cfg.channel.sigma_sh());
    const FirstPassagePmf pmf = first_passage_pmf(
        survival_probability(cfg.channel, mp, gamma_pl, cfg.delta_d, ggrid),
        cfg.delta_d);
    emp = empirical_fpd(path, cfg.channel, mcc);
    ks = ks_distance(emp, pmf);
  } else {
    solver = "upcrossing_volterra";
    mcc.conditioning = Conditioning::below_threshold_minus_eps;
    mcc.eps = cfg.epsilon;
    const FpdDensity dens =
        solve_upcrossing_fpd(cfg.channel, table, cfg.epsilon, grid);
    emp = empirical_fpd(path, cfg.channel, mcc);
    ks = ks_distance(emp, dens);
  }

  ojson j;
  j["solver"] = solver;
  j["trials"] = emp.total;
  j["ks"] = ks;
  j["threshold"] = kKsThreshold;
  j["pass"] = ks < kKsThreshold;
  j["censored_fraction"] = static_cast<double>(emp.censored_count) /
                           static_cast<double>(emp.total);
  out << j.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& out_path,
              std::ostream& out) {
  if (!cfg.sweep) {
    throw ConfigError("sweep command needs a sweep block in the config");
  }
  if (!cfg.channel.multipath) {
    throw ConfigError(
        "sweep computes multipath expected distances; add channel.multipath");
  }
  const DiscretizedPath path = build_path(cfg);
  const int n = config_n_steps(cfg, path);
  const VolterraGrid grid = make_volterra_grid(n * cfg.delta_d, n);
  const std::vector<double> gamma_pl =
      node_path_loss(build_table(cfg, path), grid);

  CsvSink sink(out_path, out);
  std::ostream& os = sink.stream();
  os << "value,expected_fpd_m,residual_mass\n";

  std::vector<double> expected;
  for (const double v : cfg.sweep->values) {
    ChannelParams pv = cfg.channel;
    switch (cfg.sweep->param) {
      case SweepSpec::Param::sigma_sh_sq:
        pv.sigma_sh_sq = v;
        break;
      case SweepSpec::Param::beta_sh:
        pv.beta_sh = v;
        break;
      case SweepSpec::Param::k_ric:
        pv.multipath->k_ric = v;
        break;
    }
    const GammaGrid ggrid =
        make_gamma_grid(pv.sigma_sh(), cfg.grid.m_points, kGridSpanSigmas);
    const MultipathCdf mp = build_multipath_cdf(
        pv, gamma_pl, kGridSpanSigmas * pv.sigma_sh());
    const FirstPassagePmf pmf = first_passage_pmf(
        survival_probability(pv, mp, gamma_pl, cfg.delta_d, ggrid),
        cfg.delta_d);
    const double e = expected_first_passage(pmf);
    expected.push_back(e);
    os << fmt(v) << ',' << fmt(e) << ',' << fmt(pmf.residual) << '\n';
  }

  const bool expect_decreasing =
      cfg.sweep->param == SweepSpec::Param::sigma_sh_sq;
  for (std::size_t i = 1; i < expected.size(); ++i) {
    const bool ok = expect_decreasing ? expected[i] < expected[i - 1]
                                      : expected[i] > expected[i - 1];
    if (!ok) {
      throw std::runtime_error(
          expect_decreasing
              ? "expected distance failed to decrease along the sweep"
              : "expected distance failed to increase along the sweep");
    }
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"first-passage connectivity-distance toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string mp_mode = "off";
  bool force = false;

  const auto add_common = [&config_path, &out_path](CLI::App* sub,
                                                    bool with_out) {
    sub->add_option("--config", config_path, "JSON run configuration")
        ->required();
    if (with_out) {
      sub->add_option("--out", out_path, "output CSV file (default stdout)");
    }
  };

  CLI::App* c_certify = app.add_subcommand(
      "certify", "check path admissibility for the analysis");
  add_common(c_certify, false);
  CLI::App* c_fpd =
      app.add_subcommand("fpd", "compute the first-passage density and CDF");
  add_common(c_fpd, true);
  c_fpd->add_option("--multipath", mp_mode, "on|off (default off)")
      ->check(CLI::IsMember({"on", "off"}));
  c_fpd->add_flag("--force", force,
                  "compute even when certification rejects the path");
  CLI::App* c_validate = app.add_subcommand(
      "validate", "compare the solver against the Monte Carlo oracle");
  add_common(c_validate, false);
  CLI::App* c_sweep = app.add_subcommand(
      "sweep", "expected first-passage distance over a parameter sweep");
  add_common(c_sweep, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const auto parsed = app.get_subcommands();
    out << (parsed.empty() ? app.help() : parsed.front()->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 3;
  }

  try {
    const RunConfig cfg = load_config(config_path);
    if (app.got_subcommand(c_certify)) return cmd_certify(cfg, out);
    if (app.got_subcommand(c_fpd)) {
      return cmd_fpd(cfg, mp_mode == "on", force, out_path, out, err);
    }
    if (app.got_subcommand(c_validate)) return cmd_validate(cfg, out);
    return cmd_sweep(cfg, out_path, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace fpd
