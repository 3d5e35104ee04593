#include "fpd/rician.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fpd {

double rician_pdf_linear(double k_ric, double z) {
  if (k_ric < 0.0) throw std::domain_error("rician_pdf_linear: k_ric < 0");
  if (z < 0.0) return 0.0;
  const double w = 2.0 * std::sqrt(z * k_ric * (1.0 + k_ric));
  const double log_f =
      std::log1p(k_ric) - k_ric - (1.0 + k_ric) * z + log_bessel_i0(w);
  return std::exp(log_f);
}

namespace {

/// Integral of the linear-power density over [0, z_up], with the
/// integration anchored around the dominant-component peak at z = 1 so the
/// adaptive rule cannot step over a narrow spike at large K.
double rician_power_cdf(double k_ric, double z_up) {
  if (z_up <= 0.0) return 0.0;
  auto f = [k_ric](double z) { return rician_pdf_linear(k_ric, z); };
  const double sd = std::sqrt(2.0 * k_ric + 1.0) / (1.0 + k_ric);
  std::vector<double> cuts = {0.0};
  for (double c : {1.0 - 8.0 * sd, 1.0 + 8.0 * sd}) {
    if (c > 0.0 && c < z_up) cuts.push_back(c);
  }
  cuts.push_back(z_up);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += integrate(f, cuts[i], cuts[i + 1], 1e-10);
  }
  return std::min(total, 1.0);
}

}  // namespace

double rician_cdf_db(double k_ric, double gamma_mp) {
  const double z_up = std::pow(10.0, gamma_mp / 10.0);
  return rician_power_cdf(k_ric, z_up);
}

MultipathCdf MultipathCdf::step() { return MultipathCdf{}; }

MultipathCdf MultipathCdf::rician(double k_ric, double x_min, double x_max) {
  if (!(x_max > x_min)) {
    throw std::invalid_argument("MultipathCdf::rician: empty range");
  }
  const double dx = 0.005;  // dB
  const std::size_t n = static_cast<std::size_t>(
                            std::ceil((x_max - x_min) / dx)) + 1;
  // Cumulative Simpson of dF/dx = f(z(x)) z(x) ln(10)/10 on the dB grid,
  // anchored at the quadrature reference value at x_min.
  const double ln10_over_10 = std::log(10.0) / 10.0;
  auto dens_db = [&](double x) {
    const double z = std::pow(10.0, x / 10.0);
    return rician_pdf_linear(k_ric, z) * z * ln10_over_10;
  };
  std::vector<double> vals(n);
  vals[0] = rician_cdf_db(k_ric, x_min);
  for (std::size_t i = 1; i < n; ++i) {
    const double a = x_min + (i - 1) * dx;
    // Simpson over one interval (the integrand is smooth and slowly varying
    // at this spacing).
    vals[i] = vals[i - 1] + dx / 6.0 *
                                (dens_db(a) + 4.0 * dens_db(a + 0.5 * dx) +
                                 dens_db(a + dx));
    vals[i] = std::min(vals[i], 1.0);
  }
  MultipathCdf out;
  out.table_ = std::make_shared<MonotoneCubic>(x_min, dx, std::move(vals));
  out.x_min_ = x_min;
  out.x_max_ = x_min + (n - 1) * dx;
  return out;
}

double MultipathCdf::operator()(double x_db) const {
  if (!table_) return x_db >= 0.0 ? 1.0 : 0.0;
  return (*table_)(x_db);  // MonotoneCubic clamps outside the table
}

}  // namespace fpd
