#pragma once

#include <array>
#include <cmath>
#include <string>

namespace neutral {

using Mat2 = std::array<std::array<double, 2>, 2>;

inline Mat2 rotation(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {{{c, -s}, {s, c}}};
}

inline Mat2 operator*(const Mat2& a, const Mat2& b) {
  Mat2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return r;
}

inline Mat2 operator-(const Mat2& a, const Mat2& b) {
  Mat2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = a[i][j] - b[i][j];
  return r;
}

inline Mat2 transpose(const Mat2& a) { return {{{a[0][0], a[1][0]}, {a[0][1], a[1][1]}}}; }

/// Frobenius norm.
inline double norm(const Mat2& a) {
  return std::sqrt(a[0][0] * a[0][0] + a[0][1] * a[0][1] + a[1][0] * a[1][0] + a[1][1] * a[1][1]);
}

enum class TensorSource { spectral, bem };

inline std::string to_string(TensorSource s) { return s == TensorSource::spectral ? "spectral" : "bem"; }

/// Polarization tensor T of the far-field expansion
///     u(x) = a.x + <T a, x> / (2 pi |x|^2) + O(|x|^-2).
/// `resolution` is the Fourier truncation N (spectral) or the node count n (bem).
struct PolarizationTensor {
  Mat2 entries{};
  TensorSource provenance = TensorSource::spectral;
  int resolution = 0;

  double operator()(int i, int j) const { return entries[i][j]; }
  double norm() const { return neutral::norm(entries); }
};

}  // namespace neutral
