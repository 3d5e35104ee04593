#include "fpd/math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fpd {

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double log_bessel_i0(double w) {
  if (w < 0.0) throw std::domain_error("log_bessel_i0: negative argument");
  if (w < 700.0) return std::log(std::cyl_bessel_i(0.0, w));
  // I0(w) ~ e^w / sqrt(2 pi w) * (1 + 1/(8w) + 9/(128 w^2) + 75/(1024 w^3))
  const double iw = 1.0 / w;
  const double series =
      1.0 + iw * (0.125 + iw * (0.0703125 + iw * 0.0732421875));
  return w - 0.5 * std::log(2.0 * kPi * w) + std::log(series);
}

namespace {

double simpson(double a, double fa, double b, double fb, double f_mid) {
  return (b - a) / 6.0 * (fa + 4.0 * f_mid + fb);
}

double adaptive_aux(const std::function<double(double)>& f, double a,
                    double fa, double b, double fb, double c, double fc,
                    double whole, double eps, int depth) {
  const double m1 = 0.5 * (a + c);
  const double m2 = 0.5 * (c + b);
  const double f1 = f(m1);
  const double f2 = f(m2);
  const double left = simpson(a, fa, c, fc, f1);
  const double right = simpson(c, fc, b, fb, f2);
  const double delta = left + right - whole;
  // Requested tolerances below the rounding noise of the panel sums are not
  // attainable; gate on that floor so concentrated integrands (whose global
  // magnitude estimate undershoots) cannot force full-depth subdivision.
  const double noise =
      100.0 * std::numeric_limits<double>::epsilon() *
      (std::abs(left) + std::abs(right) + std::abs(whole));
  if (depth <= 0 || std::abs(delta) <= std::max(15.0 * eps, noise)) {
    return left + right + delta / 15.0;
  }
  return adaptive_aux(f, a, fa, c, fc, m1, f1, left, 0.5 * eps, depth - 1) +
         adaptive_aux(f, c, fc, b, fb, m2, f2, right, 0.5 * eps, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double c = 0.5 * (a + b);
  const double fc = f(c);
  const double whole = simpson(a, fa, b, fb, fc);
  // Scale the absolute tolerance from a refined magnitude estimate so that
  // the requested tolerance is effectively relative.
  const double m1 = 0.5 * (a + c);
  const double m2 = 0.5 * (c + b);
  const double refined = simpson(a, fa, c, fc, f(m1)) +
                         simpson(c, fc, b, fb, f(m2));
  const double scale = std::max({std::abs(whole), std::abs(refined), 1e-300});
  return adaptive_aux(f, a, fa, b, fb, c, fc, whole, rel_tol * scale, 48);
}

double golden_max(const std::function<double(double)>& f, double a, double b,
                  double x_tol) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > x_tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

std::vector<double> cumtrapz(const std::vector<double>& y, double h) {
  std::vector<double> out(y.size(), 0.0);
  for (std::size_t i = 1; i < y.size(); ++i) {
    out[i] = out[i - 1] + 0.5 * h * (y[i - 1] + y[i]);
  }
  return out;
}

double trapezoid(const std::vector<double>& y, double h) {
  if (y.size() < 2) return 0.0;
  double s = 0.0;
  for (double v : y) s += v;
  s -= 0.5 * (y.front() + y.back());
  return s * h;
}

MonotoneCubic::MonotoneCubic(double x0, double dx, std::vector<double> y)
    : x0_(x0), dx_(dx), y_(std::move(y)) {
  const std::size_t n = y_.size();
  if (n < 2 || dx_ <= 0.0) {
    throw std::invalid_argument("MonotoneCubic: need >= 2 nodes, dx > 0");
  }
  std::vector<double> slope(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) slope[i] = (y_[i + 1] - y_[i]) / dx_;
  d_.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    // Fritsch-Butland: harmonic mean of one-sided slopes when they agree in
    // sign, zero otherwise; keeps the interpolant monotone on each interval.
    if (slope[i - 1] * slope[i] > 0.0) {
      d_[i] = 2.0 * slope[i - 1] * slope[i] / (slope[i - 1] + slope[i]);
    }
  }
  auto endpoint = [](double s_near, double s_far) {
    double d = 1.5 * s_near - 0.5 * s_far;  // one-sided parabolic estimate
    if (d * s_near <= 0.0) return 0.0;
    if (std::abs(d) > 3.0 * std::abs(s_near)) return 3.0 * s_near;
    return d;
  };
  d_[0] = (n == 2) ? slope[0] : endpoint(slope[0], slope[1]);
  d_[n - 1] = (n == 2) ? slope[0] : endpoint(slope[n - 2], slope[n - 3]);
}

double MonotoneCubic::operator()(double x) const {
  const std::size_t n = y_.size();
  double t = (x - x0_) / dx_;
  if (t <= 0.0) return y_.front();
  if (t >= static_cast<double>(n - 1)) return y_.back();
  const std::size_t i = static_cast<std::size_t>(t);
  t -= static_cast<double>(i);
  const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
  const double h10 = t * (1.0 - t) * (1.0 - t);
  const double h01 = t * t * (3.0 - 2.0 * t);
  const double h11 = t * t * (t - 1.0);
  return h00 * y_[i] + h10 * dx_ * d_[i] + h01 * y_[i + 1] +
         h11 * dx_ * d_[i + 1];
}

double cubic4_interp(const std::vector<double>& y, double x0, double dx,
                     double x, double outside) {
  const long n = static_cast<long>(y.size());
  if (n < 4) throw std::invalid_argument("cubic4_interp: need >= 4 nodes");
  const double t = (x - x0) / dx;
  if (t < 0.0 || t > static_cast<double>(n - 1)) return outside;
  long i = static_cast<long>(t);
  if (i > n - 2) i = n - 2;
  // Centered stencil [i-1, i, i+1, i+2], shifted at the boundaries.
  long j0 = std::clamp(i - 1, 0l, n - 4);
  const double u = t - static_cast<double>(j0);
  const double c0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
  const double c1 = u * (u - 2.0) * (u - 3.0) / 2.0;
  const double c2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
  const double c3 = u * (u - 1.0) * (u - 2.0) / 6.0;
  return c0 * y[j0] + c1 * y[j0 + 1] + c2 * y[j0 + 2] + c3 * y[j0 + 3];
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double NormalStream::next() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * kPi * u2;
  cached_ = r * std::sin(a);
  has_cached_ = true;
  return r * std::cos(a);
}

}  // namespace fpd
