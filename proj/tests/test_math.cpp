#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fpd/math.hpp"

using namespace fpd;

TEST_CASE("normal density and cdf match reference values") {
  CHECK(normal_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
  CHECK(normal_pdf(1.0) == doctest::Approx(0.24197072451914337).epsilon(1e-14));
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  // symmetry
  for (double x : {0.3, 1.7, 4.2}) {
    CHECK(normal_cdf(-x) == doctest::Approx(1.0 - normal_cdf(x)).epsilon(1e-13));
    CHECK(normal_pdf(-x) == doctest::Approx(normal_pdf(x)).epsilon(1e-15));
  }
  // deep tail stays accurate (erfc-based, no catastrophic cancellation)
  CHECK(normal_cdf(-10.0) ==
        doctest::Approx(7.619853024160526e-24).epsilon(1e-10));
  CHECK(normal_cdf(-37.0) > 0.0);
}

TEST_CASE("log-domain bessel i0 matches the standard library where it can") {
  CHECK(log_bessel_i0(0.0) == doctest::Approx(0.0).epsilon(1e-15));
  for (double w : {0.1, 0.5, 1.0, 5.0, 20.0, 80.0, 400.0}) {
    const double ref = std::log(std::cyl_bessel_i(0.0, w));
    CHECK(log_bessel_i0(w) == doctest::Approx(ref).epsilon(1e-9));
  }
  // far beyond double overflow for I0 itself: check the asymptotic form
  // log I0(w) = w - log(2 pi w)/2 + log(1 + 1/(8w) + ...)
  const double w = 5000.0;
  const double asym = w - 0.5 * std::log(2.0 * kPi * w) + 1.0 / (8.0 * w);
  CHECK(log_bessel_i0(w) == doctest::Approx(asym).epsilon(1e-8));
}

TEST_CASE("adaptive quadrature hits smooth integrals at requested tolerance") {
  CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0, 1e-12) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-11));
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, kPi, 1e-12) ==
        doctest::Approx(2.0).epsilon(1e-11));
  CHECK(integrate([](double x) { return normal_pdf(x); }, -8.0, 8.0, 1e-12) ==
        doctest::Approx(1.0).epsilon(1e-11));
  // oscillatory-but-smooth case
  CHECK(integrate([](double x) { return std::cos(10.0 * x); }, 0.0, 1.0,
                  1e-12) == doctest::Approx(std::sin(10.0) / 10.0).epsilon(1e-10));
}

TEST_CASE("golden-section search locates maxima") {
  const double x1 = golden_max(
      [](double x) { return -(x - 0.3) * (x - 0.3); }, -1.0, 1.0, 1e-10);
  CHECK(x1 == doctest::Approx(0.3).epsilon(1e-8));
  const double x2 =
      golden_max([](double x) { return std::sin(x); }, 0.0, kPi, 1e-10);
  CHECK(x2 == doctest::Approx(kPi / 2.0).epsilon(1e-8));
}

TEST_CASE("trapezoid and cumulative trapezoid are exact on linear data") {
  std::vector<double> y{1.0, 2.0, 3.0, 4.0};
  const double h = 0.5;
  CHECK(trapezoid(y, h) == doctest::Approx(0.5 * (1.0 + 4.0) * 1.5).epsilon(1e-15));
  const auto c = cumtrapz(y, h);
  REQUIRE(c.size() == y.size());
  CHECK(c[0] == 0.0);
  CHECK(c[1] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(c[3] == doctest::Approx(trapezoid(y, h)).epsilon(1e-15));
}

TEST_CASE("monotone cubic interpolates nodes and never overshoots") {
  std::vector<double> y{0.0, 0.1, 0.5, 0.9, 1.0, 1.0};
  MonotoneCubic f(0.0, 1.0, y);
  for (std::size_t i = 0; i < y.size(); ++i)
    CHECK(f(double(i)) == doctest::Approx(y[i]).epsilon(1e-14));
  // monotone data => monotone interpolant, bounded by adjacent nodes
  double prev = -1.0;
  for (double x = 0.0; x <= 5.0; x += 0.01) {
    const double v = f(x);
    CHECK(v >= prev - 1e-14);
    const std::size_t cell = std::min<std::size_t>(
        y.size() - 2, static_cast<std::size_t>(x));
    CHECK(v >= y[cell] - 1e-14);
    CHECK(v <= y[cell + 1] + 1e-14);
    prev = v;
  }
  // clamps outside the grid
  CHECK(f(-3.0) == doctest::Approx(y.front()));
  CHECK(f(99.0) == doctest::Approx(y.back()));
}

TEST_CASE("4-point lagrange interpolation is exact on cubics") {
  auto poly = [](double x) { return 2.0 + x - 0.5 * x * x + 0.25 * x * x * x; };
  std::vector<double> y;
  const double x0 = -1.0, dx = 0.4;
  for (int i = 0; i < 12; ++i) y.push_back(poly(x0 + i * dx));
  for (double x : {-0.9, 0.0, 0.37, 1.11, 2.5, 3.3}) {
    CHECK(cubic4_interp(y, x0, dx, x, -99.0) ==
          doctest::Approx(poly(x)).epsilon(1e-12));
  }
  // outside the grid returns the sentinel
  CHECK(cubic4_interp(y, x0, dx, x0 - 1.0, -99.0) == -99.0);
  CHECK(cubic4_interp(y, x0, dx, x0 + 12.0 * dx, -99.0) == -99.0);
}

TEST_CASE("seed derivation gives distinct deterministic substreams") {
  CHECK(splitmix64(0) == splitmix64(0));
  CHECK(splitmix64(1) != splitmix64(2));
  CHECK(derive_seed(42, 0) != derive_seed(42, 1));
  CHECK(derive_seed(42, 0) != derive_seed(43, 0));
  CHECK(derive_seed(7, 5) == derive_seed(7, 5));
}

TEST_CASE("normal stream is deterministic with correct moments") {
  NormalStream a(12345), b(12345);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());

  NormalStream s(987654321);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.next();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(double(n)));
  CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / double(n)));

  NormalStream u(5);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}
