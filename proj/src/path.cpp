#include "fpd/path.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fpd/math.hpp"

namespace fpd {

void DiscretizedPath::validate() const {
  if (points.size() < 3) {
    throw std::invalid_argument("DiscretizedPath: need at least 3 points");
  }
  if (points.size() != cumulative_s.size()) {
    throw std::invalid_argument("DiscretizedPath: arc-length table mismatch");
  }
  if (!(delta_d > 0.0)) {
    throw std::invalid_argument("DiscretizedPath: delta_d must be > 0");
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(cumulative_s[i] > cumulative_s[i - 1])) {
      throw std::invalid_argument(
          "DiscretizedPath: cumulative_s must be strictly increasing");
    }
    // Consecutive samples of a curve sit a chord apart, which undershoots
    // the arc step by (kappa * delta_d)^2 / 24; tolerate that shortfall for
    // any curvature the rest of the analysis could meet while still
    // catching skipped or misindexed nodes.
    const double step = (points[i] - points[i - 1]).norm();
    if (std::abs(step - delta_d) > 1e-3 * delta_d) {
      throw std::invalid_argument(
          "DiscretizedPath: point spacing is not uniform");
    }
  }
}

DiscretizedPath resample_by_arc_length(const std::vector<Eigen::Vector2d>& raw,
                                       double delta_d) {
  if (raw.size() < 2) {
    throw std::invalid_argument("resample_by_arc_length: need >= 2 points");
  }
  if (!(delta_d > 0.0)) {
    throw std::invalid_argument("resample_by_arc_length: delta_d must be > 0");
  }
  std::vector<double> seg(raw.size() - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < raw.size(); ++i) {
    seg[i] = (raw[i + 1] - raw[i]).norm();
    if (seg[i] < 1e-12) {
      throw std::invalid_argument(
          "resample_by_arc_length: duplicate consecutive points");
    }
    total += seg[i];
  }
  if (delta_d > total) {
    throw std::invalid_argument(
        "resample_by_arc_length: delta_d exceeds total path length");
  }
  DiscretizedPath out;
  out.delta_d = delta_d;
  const std::size_t n_out = static_cast<std::size_t>(total / delta_d) + 1;
  out.points.reserve(n_out);
  out.cumulative_s.reserve(n_out);
  std::size_t seg_i = 0;
  double seg_start = 0.0;  // arc length at the start of segment seg_i
  for (std::size_t k = 0; k < n_out; ++k) {
    const double s = k * delta_d;
    while (seg_i + 1 < seg.size() && seg_start + seg[seg_i] < s - 1e-12) {
      seg_start += seg[seg_i];
      ++seg_i;
    }
    const double t =
        std::clamp((s - seg_start) / seg[seg_i], 0.0, 1.0);
    out.points.push_back(raw[seg_i] + t * (raw[seg_i + 1] - raw[seg_i]));
    out.cumulative_s.push_back(s);
  }
  return out;
}

CurvatureProfile curvature_profile(const DiscretizedPath& path) {
  path.validate();
  const std::size_t n = path.points.size();
  const double h2 = path.delta_d * path.delta_d;
  CurvatureProfile out;
  out.kappa.resize(n);
  auto second_diff = [&](std::size_t i) {
    return (path.points[i - 1] - 2.0 * path.points[i] + path.points[i + 1])
               .norm() / h2;
  };
  for (std::size_t i = 1; i + 1 < n; ++i) out.kappa[i] = second_diff(i);
  out.kappa[0] = second_diff(1);          // one-sided: nearest full stencil
  out.kappa[n - 1] = second_diff(n - 2);
  out.kappa_max = *std::max_element(out.kappa.begin(), out.kappa.end());
  return out;
}

double max_ball_segment_length(double kappa, double d_th) {
  if (!(d_th > 0.0)) {
    throw std::domain_error("max_ball_segment_length: d_th must be > 0");
  }
  if (kappa < 0.0 || kappa >= 1.0 / d_th) {
    throw std::domain_error(
        "max_ball_segment_length: requires 0 <= kappa < 1/d_th");
  }
  const double x = kappa * d_th;
  if (x < 1e-8) {
    // asin(x)/x -> 1; series keeps the kappa -> 0 limit exact.
    return d_th * (1.0 + x * x / 6.0);
  }
  return std::asin(x) / kappa;
}

namespace {

/// Ball-exit arc-length bound with the asin argument clamped so the pair
/// scan can still run when kappa_max >= 1/d_th (diagnostics only).
double clamped_ball_arc(double kappa, double d_th) {
  if (kappa <= 0.0) return d_th;
  const double x = std::min(kappa * d_th, 1.0);
  return std::asin(x) / kappa;
}

}  // namespace

LoopFreeResult is_dth_loop_free(const DiscretizedPath& path, double d_th,
                                double kappa_max) {
  path.validate();
  if (!(d_th > 0.0)) {
    throw std::domain_error("is_dth_loop_free: d_th must be > 0");
  }
  LoopFreeResult res;
  res.curvature_ok = kappa_max < 1.0 / d_th;
  // Equality is the tight admissible case (a circular arc whose chord is
  // exactly d_th), so require strict inequalities with a nanometre of slack
  // to keep rounding jitter on boundary pairs from raising false flags.
  // Past the curvature limit the in-ball arc is unbounded (a tight circle
  // never leaves its ball); saturate the gate at the admissible supremum
  // pi/2 * d_th so the pair scan still reports genuine revisits instead of
  // flagging neighbouring points.
  const double arc_bound =
      clamped_ball_arc(std::min(kappa_max, 1.0 / d_th), d_th) + 1e-9;
  const double d_th_sq = (d_th - 1e-9) * (d_th - 1e-9);
  const std::size_t n = path.points.size();
  for (std::size_t i = 0; i < n && !res.violation; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (path.cumulative_s[j] - path.cumulative_s[i] <= arc_bound) continue;
      if ((path.points[j] - path.points[i]).squaredNorm() <= d_th_sq) {
        res.violation = LoopFreeResult::Violation{
            path.cumulative_s[i], path.cumulative_s[j],
            (path.points[j] - path.points[i]).norm()};
        break;
      }
    }
  }
  res.loop_free = res.curvature_ok && !res.violation;
  return res;
}

DiscretizedPath make_straight_path(const StraightGeometry& g, double length,
                                   double delta_d) {
  g.validate();
  if (!(length > 2.0 * delta_d)) {
    throw std::invalid_argument("make_straight_path: length too short");
  }
  // Operator at the origin, start at (d_src, 0); theta_src is measured from
  // the line of sight toward the operator, so |q(d)|^2 reproduces
  // d_src^2 + d^2 - 2 d_src d cos(theta_src).
  const Eigen::Vector2d start(g.d_src, 0.0);
  const Eigen::Vector2d dir(-std::cos(g.theta_src), std::sin(g.theta_src));
  DiscretizedPath out;
  out.delta_d = delta_d;
  const std::size_t n = static_cast<std::size_t>(length / delta_d) + 1;
  out.points.reserve(n);
  out.cumulative_s.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = k * delta_d;
    out.points.push_back(start + s * dir);
    out.cumulative_s.push_back(s);
  }
  return out;
}

namespace {

DiscretizedPath spiral_path(const std::function<double(double)>& radius,
                            double theta0, double theta1, double delta_d) {
  if (!(theta1 > theta0)) {
    throw std::invalid_argument("spiral generator: need theta1 > theta0");
  }
  // Sample the spiral densely in theta, then resample by arc length. The
  // dense step keeps the chord-vs-arc error far below the resampled spacing.
  const double dtheta = 1e-4;
  const std::size_t n =
      static_cast<std::size_t>(std::ceil((theta1 - theta0) / dtheta)) + 1;
  std::vector<Eigen::Vector2d> raw;
  raw.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = std::min(theta0 + i * dtheta, theta1);
    const double r = radius(th);
    raw.emplace_back(r * std::cos(th), r * std::sin(th));
  }
  return resample_by_arc_length(raw, delta_d);
}

}  // namespace

DiscretizedPath make_archimedean_spiral(double a, double b, double theta0,
                                        double theta1, double delta_d) {
  return spiral_path([a, b](double th) { return a + b * th; }, theta0, theta1,
                     delta_d);
}

DiscretizedPath make_log_spiral(double a, double b, double theta0,
                                double theta1, double delta_d) {
  return spiral_path([a, b](double th) { return a * std::exp(b * th); },
                     theta0, theta1, delta_d);
}

std::vector<Eigen::Vector2d> read_waypoints_csv(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) {
    throw std::runtime_error("read_waypoints_csv: cannot open " + filename);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("read_waypoints_csv: empty file " + filename);
  }
  // Tolerate trailing whitespace/CR in the header but require the two
  // documented columns.
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
    line.pop_back();
  }
  if (line != "x_m,y_m") {
    throw std::runtime_error(
        "read_waypoints_csv: first line must be the header 'x_m,y_m'");
  }
  std::vector<Eigen::Vector2d> pts;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    double x = 0.0, y = 0.0;
    char comma = 0;
    if (!(row >> x >> comma >> y) || comma != ',') {
      throw std::runtime_error("read_waypoints_csv: malformed row " +
                               std::to_string(line_no) + " in " + filename);
    }
    pts.emplace_back(x, y);
  }
  if (pts.size() < 2) {
    throw std::runtime_error("read_waypoints_csv: need at least 2 waypoints");
  }
  return pts;
}

}  // namespace fpd
