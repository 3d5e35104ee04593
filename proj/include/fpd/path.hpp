#pragma once

// Planar path representation (operator at the origin), arc-length
// resampling, discrete curvature, and the ball-geometry checks used by the
// approximately-Markovian certification.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "fpd/types.hpp"

namespace fpd {

/// Arc-length-uniform planar polyline. The wireless operator sits at the
/// origin; points are robot positions every delta_d meters of travel.
struct DiscretizedPath {
  std::vector<Eigen::Vector2d> points;
  double delta_d = 0.0;
  std::vector<double> cumulative_s;

  void validate() const;  // uniform spacing (1e-6 rel), >=3 points,
                          // strictly increasing arc length
};

struct CurvatureProfile {
  std::vector<double> kappa;  // per-point curvature, 1/m
  double kappa_max = 0.0;
};

/// Resample an ordered waypoint polyline to uniform arc-length spacing.
/// Output points lie on the piecewise-linear interpolant of `raw`; total
/// length is preserved to within one delta_d.
DiscretizedPath resample_by_arc_length(const std::vector<Eigen::Vector2d>& raw,
                                       double delta_d);

/// Discrete curvature |r_{i-1} - 2 r_i + r_{i+1}| / delta_d^2 with one-sided
/// (shifted) stencils at the endpoints.
CurvatureProfile curvature_profile(const DiscretizedPath& path);

/// Longest arc length a curve of pointwise curvature <= kappa can spend
/// inside a ball of radius d_th: (1/kappa) * asin(kappa * d_th), continuous
/// limit d_th at kappa = 0. Requires kappa < 1/d_th.
double max_ball_segment_length(double kappa, double d_th);

struct LoopFreeResult {
  bool loop_free = false;      // overall verdict
  bool curvature_ok = false;   // kappa_max < 1/d_th
  struct Violation {
    double s_early = 0.0;  // arc length of the earlier (revisited) point
    double s_late = 0.0;   // arc length of the later point
    double separation = 0.0;  // Euclidean distance between them, m
  };
  std::optional<Violation> violation;  // first re-entry pair found, if any
};

/// A path is d_th-loop-free when every pair of points whose arc separation
/// exceeds the max_ball_segment_length bound is more than d_th apart in the
/// plane. Exact all-pairs check; kappa_max >= 1/d_th fails immediately but
/// the pair scan still runs (with the asin argument clamped) so diagnostics
/// can report the actual re-entry.
LoopFreeResult is_dth_loop_free(const DiscretizedPath& path, double d_th,
                                double kappa_max);

/// Straight path of the given total length starting d_src from the operator.
DiscretizedPath make_straight_path(const StraightGeometry& g, double length,
                                   double delta_d);

/// Archimedean spiral r = a + b*theta, theta in [theta0, theta1].
DiscretizedPath make_archimedean_spiral(double a, double b, double theta0,
                                        double theta1, double delta_d);

/// Logarithmic spiral r = a * e^{b*theta}, theta in [theta0, theta1].
DiscretizedPath make_log_spiral(double a, double b, double theta0,
                                double theta1, double delta_d);

/// Waypoint CSV with mandatory header "x_m,y_m"; operator implicitly at
/// (0, 0). Throws on missing file, wrong header, or malformed rows.
std::vector<Eigen::Vector2d> read_waypoints_csv(const std::string& filename);

}  // namespace fpd
