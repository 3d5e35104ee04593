#pragma once

// JSON run configuration (single document, unit-suffixed keys) plus the
// builders that turn a parsed config into concrete paths, path-loss tables,
// and solver grids.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpd/channel.hpp"
#include "fpd/multipath.hpp"
#include "fpd/path.hpp"
#include "fpd/types.hpp"
#include "fpd/volterra.hpp"

namespace fpd {

/// Configuration problems (missing keys, bad values, unreadable files).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PathSpec {
  enum class Type { straight, waypoints, arch_spiral, log_spiral };
  Type type = Type::straight;
  double d_src = 550.0;     // straight: start distance to the operator, m
  double theta_src = 0.0;   // straight: heading-to-operator angle, rad
  std::string file;         // waypoints: CSV path
  double a = 0.0;           // spirals: r = a + b*theta  /  r = a e^{b theta}
  double b = 0.0;
  double theta0 = 0.0;      // spirals: traversed theta range, rad
  double theta1 = 0.0;
};

struct SweepSpec {
  enum class Param { sigma_sh_sq, beta_sh, k_ric };
  Param param = Param::sigma_sh_sq;
  std::vector<double> values;
};

struct GridSpec {
  std::optional<double> d_max;  // horizon, m (exclusive with n_steps)
  std::optional<int> n_steps;
  int m_points = 4096;  // shadowing-grid nodes for the multipath recursion
};

struct McSpec {
  std::size_t trials = 100000;
  std::uint64_t seed = 1;
};

struct RunConfig {
  ChannelParams channel;
  PathSpec path;
  double delta_d = 0.03;    // m
  double epsilon = 0.1;     // dB, upcrossing margin
  double eps_m = 0.001;     // nats
  double eps_sigma = 0.001; // nats
  GridSpec grid;
  McSpec mc;
  std::optional<SweepSpec> sweep;
};

/// Parse a JSON document; unknown keys are rejected. Throws ConfigError.
RunConfig parse_config(const std::string& json_text);

/// Read and parse a config file. Throws ConfigError.
RunConfig load_config(const std::string& filename);

/// Serialize; parse(config_to_json(c)) reproduces c exactly.
std::string config_to_json(const RunConfig& cfg);

/// Discretized path implied by cfg.path (straight paths sized to the grid
/// horizon). Throws ConfigError when the path and grid are inconsistent.
DiscretizedPath build_path(const RunConfig& cfg);

/// Even marching step count implied by grid + delta_d (requested horizons
/// round to the nearest even step count; explicit odd n_steps round up).
int config_n_steps(const RunConfig& cfg, const DiscretizedPath& path);

/// Path-loss table on the solver nodes: closed form for straight paths,
/// point-form with finite-difference derivatives otherwise.
PathLossTable build_table(const RunConfig& cfg, const DiscretizedPath& path);

/// Multipath CDF for the recursion: unit step when the channel has no
/// multipath block, otherwise a Rician table spanning every argument the
/// grid can produce along this path-loss profile.
MultipathCdf build_multipath_cdf(const ChannelParams& p,
                                 const std::vector<double>& gamma_pl,
                                 double grid_halfspan_db);

}  // namespace fpd
