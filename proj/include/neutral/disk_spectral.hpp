#pragma once

#include <span>
#include <vector>

#include "neutral/conformal.hpp"
#include "neutral/tensor.hpp"

namespace neutral {

/// Fourier coefficients c_n, |n| <= N, of a function on the unit circle.
/// Modes outside the truncation read as zero.
class ModeVector {
 public:
  ModeVector() = default;
  explicit ModeVector(int truncation) : truncation_(truncation), c_(2 * truncation + 1) {}

  int truncation() const { return truncation_; }
  Complex operator[](int n) const {
    return (n < -truncation_ || n > truncation_) ? Complex{} : c_[n + truncation_];
  }
  Complex& at(int n) { return c_.at(n + truncation_); }
  std::span<const Complex> coefficients() const { return c_; }

  /// Point value sum_n c_n e^{i n theta} (real part).
  double eval(double theta) const;

 private:
  int truncation_ = 0;
  std::vector<Complex> c_;
};

/// Modes of gamma(theta) = gamma0 + 2 gamma2 cos(2 theta - phase):
/// gamma_0 = gamma0, gamma_{+-2} = gamma2 e^{-+ i phase}.
ModeVector gamma_modes(double gamma0, double gamma2, double phase = 0.0);

/// Densities phi_1, phi_2 on the unit circle for the uniform fields e_1, e_2.
struct FourierDensity {
  int truncation = 0;
  ModeVector gamma;
  ModeVector phi1;
  ModeVector phi2;

  /// psi = a_1 phi_1 + a_2 phi_2 for the direction a = a_1 + i a_2.
  ModeVector along(Complex a) const;
};

/// Solves the truncated convolution system
///     sum_k gamma_k phi_{n-k} + |n| phi_n = r_n,   |n| <= N,
/// with r_1 = -a_1 + i a_2, r_{-1} = conj(r_1), all other r_n = 0.
/// Out-of-range convolution terms are dropped; the n = 0 row is the
/// constraint sum_k gamma_k phi_{-k} = 0.
ModeVector solve_dense(const ModeVector& gamma, int N, Complex a);

/// Both directions from a single factorization.
FourierDensity solve_disk(const ModeVector& gamma, int N);

PolarizationTensor polarization(const FourierDensity& density);
PolarizationTensor polarization(const ModeVector& gamma, int N);

/// u(zeta) for |zeta| > 1 from the exterior expansions of the single and
/// double layer potentials of e^{i n theta} on the unit circle.
double eval_disk_field(const ModeVector& density, const ModeVector& gamma, Complex a, Complex zeta);

// ---------------------------------------------------------------------------
// Two-harmonic gamma: the odd-mode blocks decouple into symmetric tridiagonal
// systems
//
//     A_N: diag (gamma0 + gamma2 + 1, gamma0 + 3, ..., gamma0 + 2N - 1)
//     B_N: diag (gamma0 - gamma2 + 1, gamma0 + 3, ..., gamma0 + 2N - 1)
//
// with constant off-diagonal gamma2, acting on the modes 1, 3, ..., 2N - 1.

enum class TridiagonalBlock { A, B };

class TridiagonalSystem {
 public:
  TridiagonalSystem(double gamma0, double gamma2, int N, TridiagonalBlock block);

  int size() const { return n_; }
  /// 1-based diagonal entry d_k.
  double diagonal(int k) const { return d_.at(k - 1); }
  double off_diagonal() const { return c_; }

  /// xi_0 = 1, xi_1 = d_1, xi_k = d_k xi_{k-1} - gamma2^2 xi_{k-2}; xi_N = det.
  long double xi(int k) const { return xi_.at(k); }
  /// tau_{N+1} = 1, tau_N = d_N, tau_k = d_k tau_{k+1} - gamma2^2 tau_{k+2}.
  long double tau(int k) const { return tau_.at(k - 1); }

  /// Entry (k, j) of the inverse from the closed-form recursions, 1-based.
  double inverse_entry(int k, int j) const;
  std::vector<double> inverse_column(int j) const;

  std::vector<double> sub_diagonal() const { return std::vector<double>(n_ - 1, c_); }

 private:
  int n_;
  double c_;
  std::vector<double> d_;
  std::vector<long double> xi_;
  std::vector<long double> tau_;
};

/// x = rhs_first * (first column of the block inverse), i.e. the block solve
/// with right side rhs_first * e_1 and the tail term beyond mode 2N - 1 set to
/// zero. With (A, -1) this gives phi'_{1,2k-1}; (B, 0) the homogeneous solution
/// phi''_{1,2k-1} = 0; (B, +1) gives phi''_{2,2k-1}.
std::vector<double> solve_tridiagonal(double gamma0, double gamma2, int N, TridiagonalBlock which,
                                      double rhs_first);

/// Standard forward-elimination / back-substitution for a tridiagonal system.
std::vector<double> thomas_solve(std::span<const double> sub, std::span<const double> diag,
                                 std::span<const double> sup, std::span<const double> rhs);

}  // namespace neutral
