#pragma once

// Shared numeric utilities: Gaussian helpers, log-domain Bessel I0, adaptive
// quadrature, interpolation, golden-section search, and deterministic RNG
// streams used by the Monte Carlo oracle.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace fpd {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal CDF, accurate in both tails (erfc-based).
double normal_cdf(double x);

/// log(I0(w)) for w >= 0 without overflow (asymptotic series for large w).
double log_bessel_i0(double w);

/// Adaptive Simpson quadrature of f over [a, b] with relative tolerance.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol);

/// Golden-section search for the maximizer of f on [a, b]; returns argmax
/// with |error| <= x_tol.
double golden_max(const std::function<double(double)>& f, double a, double b,
                  double x_tol);

/// Cumulative trapezoid integral of uniformly sampled y with spacing h;
/// result[0] = 0.
std::vector<double> cumtrapz(const std::vector<double>& y, double h);

/// Trapezoid integral of uniformly sampled y with spacing h.
double trapezoid(const std::vector<double>& y, double h);

/// Monotonicity-preserving piecewise-cubic interpolant (Fritsch-Butland
/// limited Hermite) on a uniform grid. Never overshoots the data range
/// between adjacent nodes, so interpolated CDFs stay nondecreasing.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(double x0, double dx, std::vector<double> y);
  /// Evaluate at x; clamps to the end node values outside the grid.
  double operator()(double x) const;

 private:
  double x0_ = 0.0;
  double dx_ = 1.0;
  std::vector<double> y_;
  std::vector<double> d_;  // node derivatives
};

/// Centered 4-point Lagrange cubic interpolation of uniformly sampled values
/// (y[i] at x0 + i*dx), returning `outside` beyond the grid. O(dx^4) accurate
/// on smooth data; the caller clamps if nonnegativity is required.
double cubic4_interp(const std::vector<double>& y, double x0, double dx,
                     double x, double outside);

/// SplitMix64 mixing function.
std::uint64_t splitmix64(std::uint64_t x);

/// Independent substream seed for a (seed, index) pair.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed + 0x9E3779B97F4A7C15ull * (index + 1));
}

/// Deterministic standard-normal stream: mt19937_64 + Box-Muller, bit-stable
/// across platforms for a fixed seed (no libc distribution objects involved,
/// their output is implementation-defined).
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : eng_(seed) {}

  /// Uniform draw in (0, 1).
  double uniform() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next();

 private:
  std::mt19937_64 eng_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace fpd
