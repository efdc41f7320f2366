#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/rational.hpp>
#include <vector>

#include "neutral/interface.hpp"

using namespace neutral;
using Q = boost::rational<long long>;

namespace {

// Plain Thomas elimination, kept separate from the library's version.
std::vector<double> eliminate(std::vector<double> diag, double off, std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = off / diag[i - 1];
    diag[i] -= m * off;
    rhs[i] -= m * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - off * x[i + 1]) / diag[i];
  return x;
}

// T11 / 2 pi = 2 x_1 - 1 with x = A^{-1} e_1 on the odd modes (T22 likewise with B).
double odd_block_tensor(double g0, double g2, int N, bool first) {
  std::vector<double> diag(N);
  diag[0] = g0 + (first ? g2 : -g2) + 1.0;
  for (int k = 2; k <= N; ++k) diag[k - 1] = g0 + 2.0 * k - 1.0;
  std::vector<double> rhs(N, 0.0);
  rhs[0] = 1.0;
  return 2.0 * kPi * (2.0 * eliminate(diag, g2, rhs)[0] - 1.0);
}

}  // namespace

TEST_CASE("closed form at b = 1/4 is exactly (17/15, -8/15)") {
  const auto [g0, g2] = gamma_closed_form_exact(Q(1, 4));
  CHECK(g0 == Q(17, 15));
  CHECK(g2 == Q(-8, 15));
  const auto [h0, h2] = gamma_closed_form_exact(Q(0));
  CHECK(h0 == Q(1));
  CHECK(h2 == Q(0));
}

TEST_CASE("closed form in floating point and its domain") {
  const GammaCoefficients g = gamma_closed_form(0.25);
  CHECK(g.gamma0 == doctest::Approx(17.0 / 15.0).epsilon(1e-15));
  CHECK(g.gamma2 == doctest::Approx(-8.0 / 15.0).epsilon(1e-15));
  // At the bound gamma is non-negative with a zero: gamma0 = 2 |gamma2|.
  const GammaCoefficients edge = gamma_closed_form(kMaxAdmissibleB);
  CHECK(edge.gamma0 == doctest::Approx(2.0 * std::abs(edge.gamma2)).epsilon(1e-12));
  CHECK_THROWS_AS(gamma_closed_form(0.3), Error);
  CHECK_THROWS_AS(gamma_closed_form(-0.1), Error);
}

TEST_CASE("ellipse beta matches 17/15 - 16/15 cos 2theta over |Phi'|") {
  const ConformalMap map = ConformalMap::ellipse(1.25, 0.75);
  const InterfaceParameter p = InterfaceParameter::closed_form(map);
  for (int k = 0; k < 90; ++k) {
    const double t = 2.0 * kPi * (k + 0.25) / 90;
    const double jac = std::abs(1.0 - 0.25 * std::polar(1.0, -2.0 * t));
    const double expected = (17.0 / 15.0 - 16.0 / 15.0 * std::cos(2.0 * t)) / jac;
    CHECK(p.beta(t) == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("droplet beta matches the explicit Jacobian form and blows up at the corner") {
  const ConformalMap map = ConformalMap::droplet();
  const InterfaceParameter p = InterfaceParameter::closed_form(map);
  for (int k = 0; k < 360; ++k) {
    const double t = -kPi + 2.0 * kPi * (k + 0.5) / 360;
    if (std::abs(std::abs(t) - kPi) < 0.05) continue;
    const Complex e = std::polar(1.0, t);
    const double factor = std::abs((1.0 + std::conj(e)) / std::pow(1.0 + 1.0 / (2.0 * e), 2));
    const double expected = (17.0 / 15.0 - 16.0 / 15.0 * std::cos(2.0 * t)) / factor;
    CHECK(std::abs(p.beta(t) - expected) <= 1e-12 * std::max(1.0, expected));
  }
  CHECK_THROWS_AS(p.beta(kPi), Error);
  CHECK_THROWS_AS(p.beta(-kPi), Error);
  // Near the cusp beta ~ (1/15) / (4 |theta - pi|).
  CHECK(p.beta(kPi - 1e-5) == doctest::Approx(1.0 / (15.0 * 4e-5)).epsilon(1e-3));
}

TEST_CASE("calibrated gamma reproduces the target disk tensor") {
  for (double b : {0.05, 0.1, 0.25}) {
    const CalibrationResult cal = calibrate_gamma(b, 128);
    CHECK(cal.residual <= 1e-10);
    const double g0 = cal.coefficients.gamma0, g2 = cal.coefficients.gamma2;
    CHECK(g0 >= 2.0 * std::abs(g2));
    // Independent route through the odd-mode tridiagonal blocks.
    CHECK(odd_block_tensor(g0, g2, 128, true) == doctest::Approx(2.0 * kPi * b).epsilon(1e-9));
    CHECK(odd_block_tensor(g0, g2, 128, false) == doctest::Approx(-2.0 * kPi * b).epsilon(1e-9));
  }
}

TEST_CASE("closed-form gamma misses the target by a few to tens of percent") {
  // The two-harmonic closed form solves only the leading-order balance; the
  // coupling to higher odd modes leaves a residual that grows with b.
  double previous = 0.0;
  for (double b : {0.05, 0.1, 0.25}) {
    const GammaCoefficients g = gamma_closed_form(b);
    const double t11 = odd_block_tensor(g.gamma0, g.gamma2, 128, true);
    const double rel = std::abs(t11 - 2.0 * kPi * b) / (2.0 * kPi * b);
    CHECK(rel > previous);
    CHECK(rel < 0.5);
    previous = rel;
  }
}

TEST_CASE("calibration rejects impossible targets") {
  CHECK_THROWS_AS(calibrate_gamma(1.2, 64), Error);
  CHECK_THROWS_AS(calibrate_gamma(0.6, 64), Error);
  const CalibrationResult zero = calibrate_gamma(0.0, 64);
  CHECK(zero.coefficients.gamma0 == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(zero.coefficients.gamma2) < 1e-10);
}

TEST_CASE("constant beta neutral disk") {
  CHECK(neutral_disk_beta(1.0, std::numeric_limits<double>::infinity(), 1.0) == 1.0);
  CHECK(neutral_disk_beta(2.0, std::numeric_limits<double>::infinity(), 1.0) == 0.5);
  CHECK(neutral_disk_beta(1.0, 3.0, 1.0) == doctest::Approx(1.5));
  CHECK_THROWS_AS(neutral_disk_beta(1.0, 1.0, 1.0), Error);
  CHECK_THROWS_AS(neutral_disk_beta(0.0, 2.0, 1.0), Error);

  const InterfaceParameter p = InterfaceParameter::constant(ConformalMap::identity(), 0.7);
  CHECK(p.is_constant_beta());
  CHECK(p.beta(1.0) == 0.7);
  CHECK(p.gamma(1.0) == doctest::Approx(0.7));
  CHECK_THROWS_AS(InterfaceParameter::constant(ConformalMap::identity(), -1.0), Error);
}

TEST_CASE("complex b rotates the cos 2theta term") {
  const ConformalMap map = ConformalMap::laurent({{0.0, 0.2}});
  const InterfaceParameter p = InterfaceParameter::closed_form(map);
  CHECK(p.phase() == doctest::Approx(kPi / 2));
  const GammaCoefficients g = gamma_closed_form(0.2);
  for (double t : {0.0, 0.4, 1.3, 2.9}) {
    CHECK(p.gamma(t) == doctest::Approx(g.gamma0 + 2.0 * g.gamma2 * std::cos(2.0 * t - kPi / 2)));
  }
  const ModeVector m = p.modes();
  for (double t : {0.1, 0.9, 2.2}) CHECK(m.eval(t) == doctest::Approx(p.gamma(t)).epsilon(1e-14));
  CHECK(p.min_gamma() == doctest::Approx(g.gamma0 + 2.0 * g.gamma2));
}

TEST_CASE("closed-form parameter beyond the bound is refused") {
  CHECK_THROWS_AS(InterfaceParameter::closed_form(ConformalMap::laurent({{0.3, 0.0}})), Error);
  CHECK_NOTHROW(InterfaceParameter::calibrated(ConformalMap::laurent({{0.26, 0.0}}), 128));
}
