#pragma once

// Rician multipath fading in dB: density of the unit-mean linear power Z,
// reference CDF of 10*log10(Z) by adaptive quadrature, a fast tabulated CDF
// for grid-heavy consumers, and the no-multipath unit-step special case.

#include <memory>

#include "fpd/math.hpp"

namespace fpd {

/// Density of the unit-mean Rician power Z:
/// f(z) = (1+K) exp(-K - (1+K) z) I0(2 sqrt(z K (1+K))), z >= 0.
double rician_pdf_linear(double k_ric, double z);

/// CDF of the multipath term in dB, F(x) = Pr(10 log10(Z) <= x), evaluated
/// by adaptive quadrature of the density with relative tolerance 1e-10.
double rician_cdf_db(double k_ric, double gamma_mp);

/// Multipath CDF used inside grid recursions: either the exact unit step at
/// 0 dB (no multipath) or a tabulated Rician CDF with monotone cubic
/// interpolation (values clamp to the endpoint CDF outside the table).
class MultipathCdf {
 public:
  /// No-multipath mode: F(x) = 1[x >= 0].
  static MultipathCdf step();

  /// Tabulated Rician CDF covering [x_min, x_max] dB (spacing 0.005 dB),
  /// anchored to the adaptive-quadrature reference at the lower end.
  static MultipathCdf rician(double k_ric, double x_min, double x_max);

  double operator()(double x_db) const;
  bool is_step() const { return !table_; }

 private:
  MultipathCdf() = default;
  std::shared_ptr<MonotoneCubic> table_;  // empty => unit step
  double x_min_ = 0.0, x_max_ = 0.0;
};

}  // namespace fpd
