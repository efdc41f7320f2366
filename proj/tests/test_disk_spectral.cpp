#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "neutral/disk_spectral.hpp"

using namespace neutral;

namespace {

Eigen::MatrixXd dense_block(double g0, double g2, int N, bool a_block) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(N, N);
  for (int k = 1; k <= N; ++k) m(k - 1, k - 1) = g0 + 2.0 * k - 1.0;
  m(0, 0) = g0 + (a_block ? g2 : -g2) + 1.0;
  for (int k = 0; k + 1 < N; ++k) m(k, k + 1) = m(k + 1, k) = g2;
  return m;
}

// u = a.x - S[gamma psi] + D[psi] on the unit circle by the trapezoid rule,
// with Gamma(x) = log|x| / (2 pi).
double quadrature_field(const ModeVector& psi, const ModeVector& gamma, Complex a, Complex x) {
  constexpr int M = 2048;
  double s = 0.0, d = 0.0;
  for (int j = 0; j < M; ++j) {
    const double t = 2.0 * kPi * j / M;
    const Complex y = std::polar(1.0, t);
    const double f = psi.eval(t);
    const Complex r = x - y;
    s += std::log(std::abs(r)) * gamma.eval(t) * f;
    // d/dnu_y log|x - y| = (y - x).nu_y / |x - y|^2 with nu_y = y.
    d += ((y - x) * std::conj(y)).real() / std::norm(r) * f;
  }
  const double h = 2.0 * kPi / M;
  return (std::conj(a) * x).real() - s * h / (2.0 * kPi) + d * h / (2.0 * kPi);
}

}  // namespace

TEST_CASE("mode vector indexing and evaluation") {
  ModeVector v(3);
  v.at(1) = Complex(0.5, 0.0);
  v.at(-1) = Complex(0.5, 0.0);
  v.at(0) = 2.0;
  CHECK(v[7] == Complex{});
  CHECK(v.eval(0.0) == doctest::Approx(3.0));
  CHECK(v.eval(kPi) == doctest::Approx(1.0));
  CHECK_THROWS(v.at(4));

  const ModeVector g = gamma_modes(1.2, -0.5, 0.3);
  for (double t : {0.0, 0.7, 2.5}) CHECK(g.eval(t) == doctest::Approx(1.2 - 1.0 * std::cos(2.0 * t - 0.3)));
}

TEST_CASE("explicit inverse recursions match a dense inverse") {
  for (bool a_block : {true, false}) {
    const double g0 = 17.0 / 15.0, g2 = -8.0 / 15.0;
    const int N = 64;
    const TridiagonalSystem sys(g0, g2, N, a_block ? TridiagonalBlock::A : TridiagonalBlock::B);
    const Eigen::MatrixXd inv = dense_block(g0, g2, N, a_block).inverse();
    double worst = 0.0;
    for (int k = 1; k <= N; ++k)
      for (int j = 1; j <= N; ++j) worst = std::max(worst, std::abs(sys.inverse_entry(k, j) - inv(k - 1, j - 1)));
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("xi_N is the determinant") {
  const double g0 = 1.3, g2 = 0.4;
  const int N = 10;
  const TridiagonalSystem sys(g0, g2, N, TridiagonalBlock::A);
  const double det = dense_block(g0, g2, N, true).determinant();
  CHECK(static_cast<double>(sys.xi(N)) == doctest::Approx(det).epsilon(1e-12));
  // Both recursions see the same determinant from opposite ends.
  CHECK(static_cast<double>(sys.tau(1)) == doctest::Approx(det).epsilon(1e-12));
}

TEST_CASE("tridiagonal solves agree: recursion, Thomas, dense") {
  const double g0 = 17.0 / 15.0, g2 = -8.0 / 15.0;
  const int N = 64;
  for (TridiagonalBlock blk : {TridiagonalBlock::A, TridiagonalBlock::B}) {
    const std::vector<double> x = solve_tridiagonal(g0, g2, N, blk, -1.0);
    const Eigen::MatrixXd m = dense_block(g0, g2, N, blk == TridiagonalBlock::A);
    const Eigen::VectorXd xd = m.partialPivLu().solve(-Eigen::VectorXd::Unit(N, 0));
    std::vector<double> diag(N), off(N - 1, g2), rhs(N, 0.0);
    for (int k = 0; k < N; ++k) diag[k] = m(k, k);
    rhs[0] = -1.0;
    const std::vector<double> xt = thomas_solve(off, diag, off, rhs);
    for (int k = 0; k < N; ++k) {
      CHECK(std::abs(x[k] - xd(k)) < 1e-10);
      CHECK(std::abs(xt[k] - xd(k)) < 1e-10);
    }
  }
  CHECK_THROWS_AS(solve_tridiagonal(1.0, 0.6, 8, TridiagonalBlock::A, 1.0), Error);
  CHECK_THROWS_AS(solve_tridiagonal(-1.0, 0.0, 8, TridiagonalBlock::A, 1.0), Error);
}

TEST_CASE("thomas_solve on a non-symmetric system") {
  const std::vector<double> sub{1.0, -2.0, 0.5}, diag{4.0, 5.0, 6.0, 3.0}, sup{0.3, 1.0, -1.0}, rhs{1.0, 2.0, 3.0, 4.0};
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  for (int i = 0; i < 4; ++i) m(i, i) = diag[i];
  for (int i = 0; i < 3; ++i) {
    m(i + 1, i) = sub[i];
    m(i, i + 1) = sup[i];
  }
  const Eigen::Vector4d expected = m.partialPivLu().solve(Eigen::Vector4d(rhs.data()));
  const std::vector<double> x = thomas_solve(sub, diag, sup, rhs);
  for (int i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(expected(i)).epsilon(1e-13));
  CHECK_THROWS_AS(thomas_solve(sub, diag, sup, std::vector<double>{1.0}), Error);
}

TEST_CASE("dense system restricted to odd modes is the tridiagonal block") {
  const double g0 = 17.0 / 15.0, g2 = -8.0 / 15.0;
  const int N = 40;
  const ModeVector gamma = gamma_modes(g0, g2);
  const FourierDensity d = solve_disk(gamma, 2 * N - 1);
  const std::vector<double> xa = solve_tridiagonal(g0, g2, N, TridiagonalBlock::A, -1.0);
  const std::vector<double> xb = solve_tridiagonal(g0, g2, N, TridiagonalBlock::B, 1.0);
  for (int k = 1; k <= N; ++k) {
    CHECK(std::abs(d.phi1[2 * k - 1] - Complex(xa[k - 1], 0.0)) < 1e-13);
    CHECK(std::abs(d.phi2[2 * k - 1] - Complex(0.0, xb[k - 1])) < 1e-13);
  }
  // Even modes vanish for a two-harmonic gamma.
  for (int n = -(2 * N - 2); n <= 2 * N - 2; n += 2) CHECK(std::abs(d.phi1[n]) < 1e-15);
}

TEST_CASE("constant gamma on the disk: T = 2 pi (1 - g) / (1 + g) I") {
  for (double g : {0.3, 1.0, 2.5}) {
    const PolarizationTensor t = polarization(gamma_modes(g, 0.0), 64);
    const double expected = 2.0 * kPi * (1.0 - g) / (1.0 + g);
    CHECK(t(0, 0) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(t(1, 1) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(std::abs(t(0, 1)) < 1e-14);
    CHECK(t.provenance == TensorSource::spectral);
    CHECK(t.resolution == 64);
  }
}

TEST_CASE("spectral field matches direct quadrature of the layer potentials") {
  const ModeVector gamma = gamma_modes(17.0 / 15.0, -8.0 / 15.0, 0.4);
  const int N = 96;
  for (Complex a : {Complex(1.0, 0.0), Complex(0.3, -0.8)}) {
    const ModeVector psi = solve_dense(gamma, N, a);
    for (Complex x : {Complex(1.5, 0.2), Complex(-0.4, 2.1), Complex(2.8, -2.0)}) {
      CHECK(eval_disk_field(psi, gamma, a, x) == doctest::Approx(quadrature_field(psi, gamma, a, x)).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(eval_disk_field(solve_dense(gamma, N, 1.0), gamma, 1.0, Complex(0.5, 0.0)), Error);
}

TEST_CASE("far field is governed by the polarization tensor") {
  const ModeVector gamma = gamma_modes(1.5, 0.4, 0.0);
  const FourierDensity d = solve_disk(gamma, 64);
  const PolarizationTensor t = polarization(d);
  const double r = 1000.0;
  for (Complex a : {Complex(1.0, 0.0), Complex(0.0, 1.0)}) {
    const ModeVector psi = d.along(a);
    for (double th : {0.3, 1.4, 2.6}) {
      const Complex x = std::polar(r, th);
      const double ta1 = t(0, 0) * a.real() + t(0, 1) * a.imag();
      const double ta2 = t(1, 0) * a.real() + t(1, 1) * a.imag();
      const double dipole = (ta1 * x.real() + ta2 * x.imag()) / (2.0 * kPi * r * r);
      const double pert = eval_disk_field(psi, gamma, a, x) - (std::conj(a) * x).real();
      CHECK(std::abs(pert - dipole) < 1e-3 * std::abs(dipole) + 1e-12);
    }
  }
}

TEST_CASE("truncation and singularity guards") {
  CHECK_THROWS_AS(solve_dense(gamma_modes(1.0, 0.2), 3, 1.0), Error);
  // gamma = -1 makes the n = +-1 rows vanish.
  CHECK_THROWS_AS(solve_disk(gamma_modes(-1.0, 0.0), 16), Error);
}
