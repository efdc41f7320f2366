#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace neutral {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Largest |b_1| for which the two-harmonic interface parameter stays non-negative.
inline const double kMaxAdmissibleB = 2.0 - std::sqrt(3.0);

/// Raised on violated preconditions or when an iterative method gives up.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MapKind { laurent, droplet };

/// Exterior conformal map of the normalized form
///
///     Phi(zeta) = zeta + b_1/zeta + b_2/zeta^2 + ... ,   |zeta| >= 1,
///
/// taking the exterior of the unit disk onto the exterior of the inclusion.
/// Laurent maps carry a finite tail. The droplet map is held in closed form,
/// Phi(zeta) = zeta + 1/(4 zeta + 2), which is the antiderivative of
/// Phi'(zeta) = (1 + 1/zeta)(1 + 1/(2 zeta))^{-2} normalized to b_0 = 0.
///
/// Values are immutable after construction.
class ConformalMap {
 public:
  static ConformalMap identity();
  /// Ellipse with semi-axes a >= b > 0, rescaled by 2/(a+b).
  static ConformalMap ellipse(double a, double b);
  static ConformalMap droplet();
  /// Validates |b_1| < 1, sampled injectivity and a self-intersection free boundary.
  static ConformalMap laurent(std::vector<Complex> tail);

  MapKind kind() const { return kind_; }

  Complex operator()(Complex zeta) const;
  Complex derivative(Complex zeta) const;
  Complex second_derivative(Complex zeta) const;

  /// Boundary point Phi(e^{i theta}).
  Complex boundary(double theta) const { return (*this)(std::polar(1.0, theta)); }

  /// Newton inversion of Phi(zeta) = z for z outside the closed inclusion.
  Complex invert(Complex z) const;

  Complex b1() const { return tail_.empty() ? Complex{} : tail_.front(); }

  /// Laurent tail b_1..b_K. For the droplet this is the series truncated at
  /// 48 terms (|b_48| < 1e-14) and is informational only.
  std::span<const Complex> tail() const { return tail_; }

  /// Angles theta of boundary points where Phi'(e^{i theta}) = 0.
  std::span<const double> corner_angles() const { return corners_; }
  bool has_corners() const { return !corners_.empty(); }

  std::string describe() const;

 private:
  ConformalMap(MapKind kind, std::vector<Complex> tail, std::vector<double> corners);

  MapKind kind_;
  std::vector<Complex> tail_;
  std::vector<double> corners_;
};

struct Admissibility {
  Complex b;
  double abs_b;
  double phase;
  bool theorem_ok;  // |b_1| <= 2 - sqrt(3)
};

Admissibility admissibility(const ConformalMap& map);

/// Sampled boundary curve of a map; used by the injectivity scan and tests.
std::vector<Complex> sample_boundary(const ConformalMap& map, int count);

/// True if the closed polygon through `points` has two non-adjacent edges that cross.
bool polygon_self_intersects(std::span<const Complex> points);

}  // namespace neutral
