#include "neutral/disk_spectral.hpp"

#include <Eigen/Dense>
#include <cstdlib>

namespace neutral {

namespace {

int highest_mode(const ModeVector& v) {
  for (int k = v.truncation(); k > 0; --k) {
    if (v[k] != Complex{} || v[-k] != Complex{}) return k;
  }
  return 0;
}

// Right side of row n = +-1 for the direction a = a1 + i a2.
Complex rhs_plus(Complex a) { return Complex(-a.real(), a.imag()); }

Eigen::MatrixXcd assemble(const ModeVector& gamma, int N) {
  const int K = highest_mode(gamma);
  if (N < 2 * K || N < 1) throw Error("spectral truncation N must be at least twice the highest gamma mode");
  const int size = 2 * N + 1;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(size, size);
  for (int n = -N; n <= N; ++n) {
    for (int k = -K; k <= K; ++k) {
      const int col = n - k;
      if (col < -N || col > N) continue;
      m(n + N, col + N) += gamma[k];
    }
    m(n + N, n + N) += std::abs(n);
  }
  return m;
}

Eigen::PartialPivLU<Eigen::MatrixXcd> factor(const Eigen::MatrixXcd& m) {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  // rcond() can miss an exactly zero pivot, so look at the pivots as well.
  const Eigen::VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
  if (!(pivots.minCoeff() > 1e-14 * pivots.maxCoeff()) || !(lu.rcond() > 1e-14)) {
    throw Error("truncated spectral system is singular (gamma negative or N too small)");
  }
  return lu;
}

ModeVector to_modes(const Eigen::VectorXcd& x, int N) {
  ModeVector v(N);
  for (int n = -N; n <= N; ++n) v.at(n) = x(n + N);
  return v;
}

Eigen::VectorXcd rhs_for(Complex a, int N) {
  Eigen::VectorXcd r = Eigen::VectorXcd::Zero(2 * N + 1);
  r(N + 1) = rhs_plus(a);
  r(N - 1) = std::conj(rhs_plus(a));
  return r;
}

// (gamma * phi)_n, n in [-(N+K), N+K].
ModeVector convolve(const ModeVector& gamma, const ModeVector& phi) {
  const int K = highest_mode(gamma);
  const int M = phi.truncation() + K;
  ModeVector out(M);
  for (int n = -M; n <= M; ++n) {
    Complex acc{};
    for (int k = -K; k <= K; ++k) acc += gamma[k] * phi[n - k];
    out.at(n) = acc;
  }
  return out;
}

}  // namespace

double ModeVector::eval(double theta) const {
  Complex acc{};
  for (int n = -truncation_; n <= truncation_; ++n) acc += (*this)[n] * std::polar(1.0, n * theta);
  return acc.real();
}

ModeVector gamma_modes(double gamma0, double gamma2, double phase) {
  ModeVector g(2);
  g.at(0) = gamma0;
  g.at(2) = gamma2 * std::polar(1.0, -phase);
  g.at(-2) = gamma2 * std::polar(1.0, phase);
  return g;
}

ModeVector FourierDensity::along(Complex a) const {
  ModeVector out(truncation);
  for (int n = -truncation; n <= truncation; ++n) out.at(n) = a.real() * phi1[n] + a.imag() * phi2[n];
  return out;
}

ModeVector solve_dense(const ModeVector& gamma, int N, Complex a) {
  const auto lu = factor(assemble(gamma, N));
  return to_modes(lu.solve(rhs_for(a, N)), N);
}

FourierDensity solve_disk(const ModeVector& gamma, int N) {
  const auto lu = factor(assemble(gamma, N));
  FourierDensity d;
  d.truncation = N;
  d.gamma = gamma;
  d.phi1 = to_modes(lu.solve(rhs_for({1.0, 0.0}, N)), N);
  d.phi2 = to_modes(lu.solve(rhs_for({0.0, 1.0}, N)), N);
  return d;
}

PolarizationTensor polarization(const FourierDensity& density) {
  PolarizationTensor t;
  t.provenance = TensorSource::spectral;
  t.resolution = density.truncation;
  const ModeVector* phis[2] = {&density.phi1, &density.phi2};
  for (int j = 0; j < 2; ++j) {
    const ModeVector& phi = *phis[j];
    const ModeVector gp = convolve(density.gamma, phi);
    // f = (gamma - 1) phi;  int cos f = pi (f_1 + f_-1),  int sin f = -i pi (f_-1 - f_1).
    const Complex f_plus = gp[1] - phi[1];
    const Complex f_minus = gp[-1] - phi[-1];
    t.entries[0][j] = (kPi * (f_plus + f_minus)).real();
    t.entries[1][j] = (Complex(0.0, -kPi) * (f_minus - f_plus)).real();
  }
  return t;
}

PolarizationTensor polarization(const ModeVector& gamma, int N) {
  return polarization(solve_disk(gamma, N));
}

double eval_disk_field(const ModeVector& density, const ModeVector& gamma, Complex a, Complex zeta) {
  if (!(std::abs(zeta) > 1.0)) throw Error("disk field evaluated on or inside the unit circle");
  const ModeVector gp = convolve(gamma, density);
  // Exterior expansions on the unit circle (n != 0):
  //   S[e^{in.}] = -r^{-|n|} e^{in theta} / (2|n|),  D[e^{in.}] = -r^{-|n|} e^{in theta} / 2,
  // and u = a.x - S[gamma psi] + D[psi]; the n = 0 terms vanish by the constraint.
  const Complex w_plus = 1.0 / std::conj(zeta);  // r^{-1} e^{i theta}
  const Complex w_minus = 1.0 / zeta;           // r^{-1} e^{-i theta}
  const int M = gp.truncation();
  Complex acc{};
  Complex pp = 1.0, pm = 1.0;
  for (int n = 1; n <= M; ++n) {
    pp *= w_plus;
    pm *= w_minus;
    const Complex c_plus = gp[n] / (2.0 * n) - density[n] / 2.0;
    const Complex c_minus = gp[-n] / (2.0 * n) - density[-n] / 2.0;
    acc += c_plus * pp + c_minus * pm;
  }
  return (std::conj(a) * zeta).real() + acc.real();
}

// ---------------------------------------------------------------------------

TridiagonalSystem::TridiagonalSystem(double gamma0, double gamma2, int N, TridiagonalBlock block)
    : n_(N), c_(gamma2), d_(N), xi_(N + 1), tau_(N + 1) {
  if (N < 1) throw Error("tridiagonal system needs N >= 1");
  d_[0] = gamma0 + (block == TridiagonalBlock::A ? gamma2 : -gamma2) + 1.0;
  for (int k = 2; k <= N; ++k) d_[k - 1] = gamma0 + 2.0 * k - 1.0;

  const long double c2 = static_cast<long double>(gamma2) * gamma2;
  xi_[0] = 1.0L;
  xi_[1] = d_[0];
  for (int k = 2; k <= N; ++k) xi_[k] = d_[k - 1] * xi_[k - 1] - c2 * xi_[k - 2];

  // tau_ stores tau_1..tau_{N+1} at offsets 0..N.
  tau_[N] = 1.0L;
  tau_[N - 1] = d_[N - 1];
  for (int k = N - 1; k >= 1; --k) tau_[k - 1] = d_[k - 1] * tau_[k] - c2 * tau_[k + 1];

  if (xi_[N] == 0.0L || !std::isfinite(xi_[N])) {
    throw Error("tridiagonal block is singular (xi_N = 0)");
  }
}

double TridiagonalSystem::inverse_entry(int k, int j) const {
  if (k < 1 || j < 1 || k > n_ || j > n_) throw Error("tridiagonal inverse index out of range");
  const long double c2 = static_cast<long double>(c_) * c_;
  auto diag = [&](int i) -> long double {
    if (n_ == 1) return 1.0L / d_[0];
    if (i == 1) return 1.0L / (d_[0] - c2 * tau(3) / tau(2));
    if (i == n_) return 1.0L / (d_[n_ - 1] - c2 * xi(n_ - 2) / xi(n_ - 1));
    return 1.0L / (d_[i - 1] - c2 * xi(i - 2) / xi(i - 1) - c2 * tau(i + 2) / tau(i + 1));
  };
  const long double ajj = diag(j);
  if (k == j) return static_cast<double>(ajj);
  const long double sign_pow = std::pow(-static_cast<long double>(c_), std::abs(k - j));
  if (k < j) return static_cast<double>(sign_pow * xi(k - 1) / xi(j - 1) * ajj);
  return static_cast<double>(sign_pow * tau(k + 1) / tau(j + 1) * ajj);
}

std::vector<double> TridiagonalSystem::inverse_column(int j) const {
  std::vector<double> col(n_);
  for (int k = 1; k <= n_; ++k) col[k - 1] = inverse_entry(k, j);
  return col;
}

std::vector<double> solve_tridiagonal(double gamma0, double gamma2, int N, TridiagonalBlock which,
                                      double rhs_first) {
  if (!(gamma0 > 0.0) || gamma0 < 2.0 * std::abs(gamma2)) {
    throw Error("tridiagonal solve requires gamma0 > 0 and gamma0 >= 2|gamma2|");
  }
  const TridiagonalSystem sys(gamma0, gamma2, N, which);
  std::vector<double> x = sys.inverse_column(1);
  for (double& v : x) v *= rhs_first;
  return x;
}

std::vector<double> thomas_solve(std::span<const double> sub, std::span<const double> diag,
                                 std::span<const double> sup, std::span<const double> rhs) {
  const std::size_t n = diag.size();
  if (rhs.size() != n || sub.size() + 1 != n || sup.size() + 1 != n) {
    throw Error("thomas_solve: inconsistent band sizes");
  }
  std::vector<double> c(n), d(n), x(n);
  double denom = diag[0];
  if (denom == 0.0) throw Error("thomas_solve: zero pivot");
  c[0] = n > 1 ? sup[0] / denom : 0.0;
  d[0] = rhs[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - sub[i - 1] * c[i - 1];
    if (denom == 0.0) throw Error("thomas_solve: zero pivot");
    c[i] = i + 1 < n ? sup[i] / denom : 0.0;
    d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / denom;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

}  // namespace neutral
