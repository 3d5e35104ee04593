#include "fpd/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace fpd {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

void check_keys(const json& j, const std::string& ctx,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("unknown key '" + item.key() + "' in " + ctx);
    }
  }
}

double get_num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) {
    throw ConfigError(std::string("key '") + key + "' must be a number");
  }
  return j.at(key).get<double>();
}

PathSpec parse_path(const json& j) {
  if (!j.is_object() || !j.contains("type")) {
    throw ConfigError("path block must be an object with a 'type'");
  }
  PathSpec spec;
  const std::string type = j.at("type").get<std::string>();
  if (type == "straight") {
    check_keys(j, "path", {"type", "d_src_m", "theta_src_rad"});
    spec.type = PathSpec::Type::straight;
    spec.d_src = get_num(j, "d_src_m", spec.d_src);
    spec.theta_src = get_num(j, "theta_src_rad", spec.theta_src);
  } else if (type == "waypoints") {
    check_keys(j, "path", {"type", "file"});
    spec.type = PathSpec::Type::waypoints;
    if (!j.contains("file")) throw ConfigError("waypoints path needs 'file'");
    spec.file = j.at("file").get<std::string>();
  } else if (type == "arch_spiral" || type == "log_spiral") {
    const bool arch = type == "arch_spiral";
    const char* bkey = arch ? "b_m_per_rad" : "b_per_rad";
    check_keys(j, "path", {"type", "a_m", arch ? "b_m_per_rad" : "b_per_rad",
                           "theta_range_rad"});
    spec.type =
        arch ? PathSpec::Type::arch_spiral : PathSpec::Type::log_spiral;
    if (!j.contains("a_m") || !j.contains(bkey) ||
        !j.contains("theta_range_rad")) {
      throw ConfigError("spiral path needs a_m, " + std::string(bkey) +
                        ", theta_range_rad");
    }
    spec.a = get_num(j, "a_m", 0.0);
    spec.b = get_num(j, bkey, 0.0);
    const auto& range = j.at("theta_range_rad");
    if (!range.is_array() || range.size() != 2) {
      throw ConfigError("theta_range_rad must be [theta0, theta1]");
    }
    spec.theta0 = range.at(0).get<double>();
    spec.theta1 = range.at(1).get<double>();
  } else {
    throw ConfigError("unknown path type '" + type + "'");
  }
  return spec;
}

void validate_semantics(const RunConfig& cfg) {
  try {
    cfg.channel.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(cfg.delta_d > 0.0)) throw ConfigError("delta_d_m must be positive");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon_db must be positive");
  if (!(cfg.eps_m > 0.0) || !(cfg.eps_sigma > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
  if (cfg.grid.m_points < 8) throw ConfigError("grid m_points must be >= 8");
  if (cfg.grid.d_max && cfg.grid.n_steps) {
    throw ConfigError("grid takes d_max_m or n_steps, not both");
  }
  if (cfg.grid.d_max && !(*cfg.grid.d_max > 0.0)) {
    throw ConfigError("grid d_max_m must be positive");
  }
  if (cfg.grid.n_steps && *cfg.grid.n_steps < 2) {
    throw ConfigError("grid n_steps must be at least 2");
  }
  if (cfg.mc.trials < 1) throw ConfigError("mc trials must be >= 1");

  switch (cfg.path.type) {
    case PathSpec::Type::straight:
      if (!(cfg.path.d_src > 0.0)) {
        throw ConfigError("d_src_m must be positive");
      }
      break;
    case PathSpec::Type::waypoints:
      if (cfg.path.file.empty()) throw ConfigError("waypoints file missing");
      break;
    case PathSpec::Type::arch_spiral:
    case PathSpec::Type::log_spiral:
      if (!(cfg.path.a > 0.0)) throw ConfigError("spiral a_m must be positive");
      if (!(cfg.path.theta1 > cfg.path.theta0)) {
        throw ConfigError("theta range must be increasing");
      }
      if (cfg.path.type == PathSpec::Type::arch_spiral &&
          !(cfg.path.a + cfg.path.b * cfg.path.theta0 > 0.0)) {
        throw ConfigError("archimedean spiral radius must start positive");
      }
      break;
  }
  if (cfg.sweep) {
    if (cfg.sweep->values.empty()) throw ConfigError("sweep values empty");
    for (const double v : cfg.sweep->values) {
      if (!(v > 0.0)) throw ConfigError("sweep values must be positive");
    }
  }
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  try {
    check_keys(j, "config",
               {"channel", "path", "delta_d_m", "epsilon_db", "tolerances",
                "grid", "mc", "sweep"});
    RunConfig cfg;
    if (j.contains("channel")) {
      const json& c = j.at("channel");
      check_keys(c, "channel",
                 {"k_db", "n_pl", "sigma_sh_sq_db2", "beta_sh_m",
                  "gamma_th_db", "multipath"});
      cfg.channel.k_db = get_num(c, "k_db", cfg.channel.k_db);
      cfg.channel.n_pl = get_num(c, "n_pl", cfg.channel.n_pl);
      cfg.channel.sigma_sh_sq =
          get_num(c, "sigma_sh_sq_db2", cfg.channel.sigma_sh_sq);
      cfg.channel.beta_sh = get_num(c, "beta_sh_m", cfg.channel.beta_sh);
      cfg.channel.gamma_th = get_num(c, "gamma_th_db", cfg.channel.gamma_th);
      if (c.contains("multipath") && !c.at("multipath").is_null()) {
        const json& m = c.at("multipath");
        check_keys(m, "multipath", {"k_ric"});
        Rician r;
        r.k_ric = get_num(m, "k_ric", 0.0);
        cfg.channel.multipath = r;
      }
    }
    if (j.contains("path")) cfg.path = parse_path(j.at("path"));
    cfg.delta_d = get_num(j, "delta_d_m", cfg.delta_d);
    cfg.epsilon = get_num(j, "epsilon_db", cfg.epsilon);
    if (j.contains("tolerances")) {
      const json& t = j.at("tolerances");
      check_keys(t, "tolerances", {"eps_m_nats", "eps_sigma_nats"});
      cfg.eps_m = get_num(t, "eps_m_nats", cfg.eps_m);
      cfg.eps_sigma = get_num(t, "eps_sigma_nats", cfg.eps_sigma);
    }
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      check_keys(g, "grid", {"d_max_m", "n_steps", "m_points"});
      if (g.contains("d_max_m")) cfg.grid.d_max = get_num(g, "d_max_m", 0.0);
      if (g.contains("n_steps")) {
        cfg.grid.n_steps = g.at("n_steps").get<int>();
      }
      cfg.grid.m_points =
          static_cast<int>(get_num(g, "m_points", cfg.grid.m_points));
    }
    if (j.contains("mc")) {
      const json& m = j.at("mc");
      check_keys(m, "mc", {"trials", "seed"});
      if (m.contains("trials")) {
        cfg.mc.trials = m.at("trials").get<std::size_t>();
      }
      if (m.contains("seed")) {
        cfg.mc.seed = m.at("seed").get<std::uint64_t>();
      }
    }
    if (j.contains("sweep") && !j.at("sweep").is_null()) {
      const json& s = j.at("sweep");
      check_keys(s, "sweep", {"param", "values"});
      if (!s.contains("param") || !s.contains("values")) {
        throw ConfigError("sweep needs 'param' and 'values'");
      }
      SweepSpec sweep;
      const std::string param = s.at("param").get<std::string>();
      if (param == "sigma_sh_sq") {
        sweep.param = SweepSpec::Param::sigma_sh_sq;
      } else if (param == "beta_sh") {
        sweep.param = SweepSpec::Param::beta_sh;
      } else if (param == "k_ric") {
        sweep.param = SweepSpec::Param::k_ric;
      } else {
        throw ConfigError("sweep param must be sigma_sh_sq, beta_sh or k_ric");
      }
      sweep.values = s.at("values").get<std::vector<double>>();
      cfg.sweep = sweep;
    }
    validate_semantics(cfg);
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
}

RunConfig load_config(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw ConfigError("cannot open config file '" + filename + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const RunConfig& cfg) {
  ojson j;
  ojson channel;
  channel["k_db"] = cfg.channel.k_db;
  channel["n_pl"] = cfg.channel.n_pl;
  channel["sigma_sh_sq_db2"] = cfg.channel.sigma_sh_sq;
  channel["beta_sh_m"] = cfg.channel.beta_sh;
  channel["gamma_th_db"] = cfg.channel.gamma_th;
  if (cfg.channel.multipath) {
    channel["multipath"] = ojson{{"k_ric", cfg.channel.multipath->k_ric}};
  } else {
    channel["multipath"] = nullptr;
  }
  j["channel"] = channel;

  ojson path;
  switch (cfg.path.type) {
    case PathSpec::Type::straight:
      path["type"] = "straight";
      path["d_src_m"] = cfg.path.d_src;
      path["theta_src_rad"] = cfg.path.theta_src;
      break;
    case PathSpec::Type::waypoints:
      path["type"] = "waypoints";
      path["file"] = cfg.path.file;
      break;
    case PathSpec::Type::arch_spiral:
    case PathSpec::Type::log_spiral: {
      const bool arch = cfg.path.type == PathSpec::Type::arch_spiral;
      path["type"] = arch ? "arch_spiral" : "log_spiral";
      path["a_m"] = cfg.path.a;
      path[arch ? "b_m_per_rad" : "b_per_rad"] = cfg.path.b;
      path["theta_range_rad"] = ojson::array({cfg.path.theta0, cfg.path.theta1});
      break;
    }
  }
  j["path"] = path;

  j["delta_d_m"] = cfg.delta_d;
  j["epsilon_db"] = cfg.epsilon;
  j["tolerances"] = ojson{{"eps_m_nats", cfg.eps_m},
                          {"eps_sigma_nats", cfg.eps_sigma}};
  ojson grid;
  if (cfg.grid.d_max) grid["d_max_m"] = *cfg.grid.d_max;
  if (cfg.grid.n_steps) grid["n_steps"] = *cfg.grid.n_steps;
  grid["m_points"] = cfg.grid.m_points;
  j["grid"] = grid;
  j["mc"] = ojson{{"trials", cfg.mc.trials}, {"seed", cfg.mc.seed}};
  if (cfg.sweep) {
    const char* name = nullptr;
    switch (cfg.sweep->param) {
      case SweepSpec::Param::sigma_sh_sq:
        name = "sigma_sh_sq";
        break;
      case SweepSpec::Param::beta_sh:
        name = "beta_sh";
        break;
      case SweepSpec::Param::k_ric:
        name = "k_ric";
        break;
    }
    j["sweep"] = ojson{{"param", name}, {"values", cfg.sweep->values}};
  }
  return j.dump(2);
}

namespace {

/// Explicitly requested step count (from n_steps or d_max), evened upward;
/// empty when the grid block left the horizon to the path.
std::optional<int> requested_steps(const RunConfig& cfg) {
  if (cfg.grid.n_steps) {
    int n = *cfg.grid.n_steps;
    if (n % 2 != 0) ++n;
    return n;
  }
  if (cfg.grid.d_max) {
    int n = static_cast<int>(std::lround(*cfg.grid.d_max / cfg.delta_d));
    if (n % 2 != 0) ++n;
    return std::max(n, 2);
  }
  return std::nullopt;
}

}  // namespace

DiscretizedPath build_path(const RunConfig& cfg) {
  try {
    switch (cfg.path.type) {
      case PathSpec::Type::straight: {
        const std::optional<int> n = requested_steps(cfg);
        if (!n) {
          throw ConfigError(
              "straight paths need grid d_max_m or n_steps to fix the "
              "horizon");
        }
        StraightGeometry g;
        g.d_src = cfg.path.d_src;
        g.theta_src = cfg.path.theta_src;
        return make_straight_path(g, *n * cfg.delta_d, cfg.delta_d);
      }
      case PathSpec::Type::waypoints:
        return resample_by_arc_length(read_waypoints_csv(cfg.path.file),
                                      cfg.delta_d);
      case PathSpec::Type::arch_spiral:
        return make_archimedean_spiral(cfg.path.a, cfg.path.b, cfg.path.theta0,
                                       cfg.path.theta1, cfg.delta_d);
      case PathSpec::Type::log_spiral:
        return make_log_spiral(cfg.path.a, cfg.path.b, cfg.path.theta0,
                               cfg.path.theta1, cfg.delta_d);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unreachable path type");
}

int config_n_steps(const RunConfig& cfg, const DiscretizedPath& path) {
  const int max_steps = static_cast<int>(path.points.size()) - 1;
  const std::optional<int> n = requested_steps(cfg);
  if (n) {
    if (*n > max_steps) {
      throw ConfigError("grid horizon exceeds the path length");
    }
    return *n;
  }
  int even_down = max_steps - (max_steps % 2);
  if (even_down < 2) throw ConfigError("path too short for the solver grid");
  return even_down;
}

PathLossTable build_table(const RunConfig& cfg, const DiscretizedPath& path) {
  if (cfg.path.type == PathSpec::Type::straight) {
    StraightGeometry g;
    g.d_src = cfg.path.d_src;
    g.theta_src = cfg.path.theta_src;
    return path_loss_table_straight(cfg.channel, g, path.cumulative_s);
  }
  return path_loss_along_path(cfg.channel, path);
}

MultipathCdf build_multipath_cdf(const ChannelParams& p,
                                 const std::vector<double>& gamma_pl,
                                 double grid_halfspan_db) {
  if (!p.multipath) return MultipathCdf::step();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const double g : gamma_pl) {
    const double t = p.gamma_th - g;
    lo = std::min(lo, t - grid_halfspan_db);
    hi = std::max(hi, t + grid_halfspan_db);
  }
  return MultipathCdf::rician(p.multipath->k_ric, lo - 1.0, hi + 1.0);
}

}  // namespace fpd
