#pragma once

#include <limits>
#include <string>
#include <utility>

#include "neutral/conformal.hpp"
#include "neutral/disk_spectral.hpp"

namespace neutral {

enum class Provenance { closed_form, calibrated, constant };

std::string to_string(Provenance p);

struct GammaCoefficients {
  double gamma0 = 1.0;
  double gamma2 = 0.0;
};

/// gamma0 = 1/(1+b) + 1/(1-b) - 1,  gamma2 = 1/(1+b) - 1/(1-b).
/// Generic over the scalar so the coefficients can be checked in exact arithmetic.
template <class Field>
std::pair<Field, Field> gamma_closed_form_exact(const Field& b) {
  const Field one(1);
  return {one / (one + b) + one / (one - b) - one, one / (one + b) - one / (one - b)};
}

/// Closed-form coefficients; b_abs must lie in [0, 2 - sqrt(3)].
GammaCoefficients gamma_closed_form(double b_abs);

/// The rotation of the cos 2 theta term that realizes a complex b_1.
double phase_for_complex_b(Complex b);

struct CalibrationResult {
  GammaCoefficients coefficients;
  int iterations = 0;
  double residual = 0.0;  // max |F| at the accepted iterate
};

/// Damped Newton (finite-difference Jacobian) on
///     F(gamma0, gamma2) = (T11 - 2 pi b, T22 + 2 pi b)
/// with T the spectral disk polarization tensor at truncation N, seeded at the
/// closed form. Converged when max |F| <= 1e-10; non-admissible roots are rejected.
CalibrationResult calibrate_gamma(double b_abs, int N);

/// Constant interface parameter neutralizing a disk of radius r:
/// beta = sigma_c sigma_m / (r (sigma_c - sigma_m)), and sigma_m / r for sigma_c = infinity.
double neutral_disk_beta(double r, double sigma_c, double sigma_m);

/// Interface parameter gamma on the unit circle together with the map used to
/// pull it back to beta on the inclusion boundary:
///     gamma(theta) = gamma0 + 2 gamma2 cos(2 theta - phase),
///     beta(Phi(e^{i theta})) = gamma(theta) / |Phi'(e^{i theta})|.
class InterfaceParameter {
 public:
  InterfaceParameter(ConformalMap map, GammaCoefficients coefficients, double phase,
                     Provenance provenance, int truncation = 0);

  /// Closed-form design for the map's b_1 (throws if |b_1| > 2 - sqrt(3)).
  static InterfaceParameter closed_form(const ConformalMap& map);
  /// Calibrated design at truncation N.
  static InterfaceParameter calibrated(const ConformalMap& map, int N);
  /// gamma = beta0 * |Phi'|, i.e. beta constant on the boundary. Only meaningful
  /// as a disk parameter when the map is the identity.
  static InterfaceParameter constant(const ConformalMap& map, double beta0);

  double gamma0() const { return coeffs_.gamma0; }
  double gamma2() const { return coeffs_.gamma2; }
  double phase() const { return phase_; }
  Provenance provenance() const { return provenance_; }
  int truncation() const { return truncation_; }
  const ConformalMap& map() const { return map_; }

  double gamma(double theta) const;
  /// Throws at a corner, where |Phi'| = 0 and beta is unbounded.
  double beta(double theta) const;

  /// Fourier modes of gamma (modes 0 and +-2).
  ModeVector modes() const { return gamma_modes(coeffs_.gamma0, coeffs_.gamma2, phase_); }

  /// min over theta of gamma, i.e. gamma0 - 2|gamma2|.
  double min_gamma() const { return coeffs_.gamma0 - 2.0 * std::abs(coeffs_.gamma2); }

  /// Constant-beta parameters have no two-harmonic gamma; `beta_constant` is set.
  double beta_constant() const { return beta0_; }
  bool is_constant_beta() const { return provenance_ == Provenance::constant; }

 private:
  ConformalMap map_;
  GammaCoefficients coeffs_;
  double phase_;
  Provenance provenance_;
  int truncation_;
  double beta0_ = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace neutral
