#include "neutral/interface.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace neutral {

namespace {

constexpr int kCalibrationMaxIter = 100;
constexpr double kCalibrationTol = 1e-10;

std::array<double, 2> calibration_residual(double g0, double g2, double b, int N) {
  const PolarizationTensor t = polarization(gamma_modes(g0, g2), N);
  return {t(0, 0) - 2.0 * kPi * b, t(1, 1) + 2.0 * kPi * b};
}

double max_abs(const std::array<double, 2>& f) { return std::max(std::abs(f[0]), std::abs(f[1])); }

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::closed_form:
      return "closed_form";
    case Provenance::calibrated:
      return "calibrated";
    case Provenance::constant:
      return "constant";
  }
  return "unknown";
}

GammaCoefficients gamma_closed_form(double b_abs) {
  if (!(b_abs >= 0.0) || b_abs > kMaxAdmissibleB) {
    std::ostringstream msg;
    msg << "closed-form gamma requires 0 <= |b| <= 2 - sqrt(3); got " << b_abs;
    throw Error(msg.str());
  }
  const auto [g0, g2] = gamma_closed_form_exact(b_abs);
  return {g0, g2};
}

double phase_for_complex_b(Complex b) {
  if (std::abs(b) == 0.0) return 0.0;
  return std::arg(b);
}

CalibrationResult calibrate_gamma(double b_abs, int N) {
  if (!(b_abs >= 0.0) || b_abs >= 1.0) throw Error("calibration requires 0 <= |b| < 1");

  // The closed form is only defined up to 2 - sqrt(3); beyond it seed at the boundary value.
  const auto seed = gamma_closed_form_exact(std::min(b_abs, kMaxAdmissibleB));
  double g0 = seed.first;
  double g2 = seed.second;
  auto f = calibration_residual(g0, g2, b_abs, N);

  for (int it = 0; it <= kCalibrationMaxIter; ++it) {
    if (max_abs(f) <= kCalibrationTol) {
      if (g0 - 2.0 * std::abs(g2) < 0.0 || !(g0 > 0.0)) {
        throw Error("calibration converged to a non-admissible gamma (gamma0 < 2|gamma2|)");
      }
      return {{g0, g2}, it, max_abs(f)};
    }
    // Forward-difference Jacobian.
    const double h0 = 1e-7 * std::max(1.0, std::abs(g0));
    const double h2 = 1e-7 * std::max(1.0, std::abs(g2));
    const auto f0 = calibration_residual(g0 + h0, g2, b_abs, N);
    const auto f2 = calibration_residual(g0, g2 + h2, b_abs, N);
    const double j00 = (f0[0] - f[0]) / h0, j10 = (f0[1] - f[1]) / h0;
    const double j01 = (f2[0] - f[0]) / h2, j11 = (f2[1] - f[1]) / h2;
    const double det = j00 * j11 - j01 * j10;
    if (det == 0.0 || !std::isfinite(det)) break;
    const double d0 = -(j11 * f[0] - j01 * f[1]) / det;
    const double d2 = -(-j10 * f[0] + j00 * f[1]) / det;

    double step = 1.0;
    bool accepted = false;
    for (int half = 0; half < 30; ++half, step *= 0.5) {
      const double n0 = g0 + step * d0, n2 = g2 + step * d2;
      if (!(n0 > 0.0)) continue;
      std::array<double, 2> fn;
      try {
        fn = calibration_residual(n0, n2, b_abs, N);
      } catch (const Error&) {
        continue;
      }
      if (max_abs(fn) < max_abs(f)) {
        g0 = n0;
        g2 = n2;
        f = fn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  std::ostringstream msg;
  msg << "calibration found no admissible root for |b| = " << b_abs << " at N = " << N;
  throw Error(msg.str());
}

double neutral_disk_beta(double r, double sigma_c, double sigma_m) {
  if (!(r > 0.0)) throw Error("disk radius must be positive");
  if (std::isinf(sigma_c)) return sigma_m / r;
  if (sigma_c == sigma_m) throw Error("neutral disk requires sigma_c != sigma_m");
  return sigma_c * sigma_m / (r * (sigma_c - sigma_m));
}

// ---------------------------------------------------------------------------

InterfaceParameter::InterfaceParameter(ConformalMap map, GammaCoefficients coefficients,
                                       double phase, Provenance provenance, int truncation)
    : map_(std::move(map)),
      coeffs_(coefficients),
      phase_(phase),
      provenance_(provenance),
      truncation_(truncation) {
  if (provenance_ != Provenance::constant && min_gamma() < -1e-14) {
    throw Error("interface parameter gamma must be non-negative (gamma0 >= 2|gamma2|)");
  }
}

InterfaceParameter InterfaceParameter::closed_form(const ConformalMap& map) {
  const Admissibility adm = admissibility(map);
  return InterfaceParameter(map, gamma_closed_form(adm.abs_b), phase_for_complex_b(adm.b),
                            Provenance::closed_form);
}

InterfaceParameter InterfaceParameter::calibrated(const ConformalMap& map, int N) {
  const Admissibility adm = admissibility(map);
  const CalibrationResult cal = calibrate_gamma(adm.abs_b, N);
  return InterfaceParameter(map, cal.coefficients, phase_for_complex_b(adm.b),
                            Provenance::calibrated, N);
}

InterfaceParameter InterfaceParameter::constant(const ConformalMap& map, double beta0) {
  if (!(beta0 >= 0.0)) throw Error("constant beta must be non-negative");
  InterfaceParameter p(map, {beta0, 0.0}, 0.0, Provenance::constant);
  p.beta0_ = beta0;
  return p;
}

double InterfaceParameter::gamma(double theta) const {
  if (is_constant_beta()) return beta0_ * std::abs(map_.derivative(std::polar(1.0, theta)));
  return coeffs_.gamma0 + 2.0 * coeffs_.gamma2 * std::cos(2.0 * theta - phase_);
}

double InterfaceParameter::beta(double theta) const {
  if (is_constant_beta()) return beta0_;
  for (double corner : map_.corner_angles()) {
    if (std::abs(std::remainder(theta - corner, 2.0 * kPi)) < 1e-12) {
      throw Error("beta is unbounded at a corner of the boundary");
    }
  }
  const double jac = std::abs(map_.derivative(std::polar(1.0, theta)));
  return gamma(theta) / jac;
}

}  // namespace neutral
