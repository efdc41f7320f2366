#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cstdlib>

#include "neutral/bem.hpp"
#include "neutral/disk_spectral.hpp"

using namespace neutral;

namespace {

double adaptive(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-14);
}

// Perfect-bonding tensor of a unit-capacity map: -2 pi [[1 + b', b''], [b'', 1 - b']].
Mat2 perfect_from_b1(Complex b) {
  return {{{-2.0 * kPi * (1.0 + b.real()), -2.0 * kPi * b.imag()}, {-2.0 * kPi * b.imag(), -2.0 * kPi * (1.0 - b.real())}}};
}

}  // namespace

TEST_CASE("discretize preconditions") {
  CHECK_THROWS_AS(discretize(ConformalMap::identity(), 15, Grading::none), Error);
  CHECK_THROWS_AS(discretize(ConformalMap::identity(), 8, Grading::none), Error);
  CHECK_THROWS_AS(discretize(ConformalMap::droplet(), 64, Grading::none), Error);
  CHECK_NOTHROW(discretize(ConformalMap::droplet(), 64, Grading::corner_graded));
  // Grading has nothing to do on a smooth curve.
  CHECK(discretize(ConformalMap::identity(), 16, Grading::corner_graded).grading == Grading::none);
}

TEST_CASE("mesh geometry: perimeter, normals, corner exclusion") {
  const BoundaryMesh ell = discretize(ConformalMap::ellipse(1.25, 0.75), 128, Grading::none);
  const double perimeter = adaptive([](double t) { return std::hypot(1.25 * std::sin(t), 0.75 * std::cos(t)); }, 0.0, 2.0 * kPi);
  CHECK(ell.perimeter() == doctest::Approx(perimeter).epsilon(1e-13));
  for (int q = 0; q < ell.size(); ++q) {
    const Complex x = ell.nodes[q];
    // Outward normal of x^2/a^2 + y^2/b^2 = 1 is parallel to (x/a^2, y/b^2).
    const Complex g(x.real() / (1.25 * 1.25), x.imag() / (0.75 * 0.75));
    CHECK(std::abs(ell.normals[q] - g / std::abs(g)) < 1e-14);
    CHECK(std::abs((std::conj(ell.normals[q]) * ell.tangents[q]).real()) < 1e-14);
  }

  const ConformalMap drop = ConformalMap::droplet();
  const BoundaryMesh dm = discretize(drop, 512, Grading::corner_graded);
  const double drop_perimeter = adaptive([&](double t) { return std::abs(drop.derivative(std::polar(1.0, t))); }, -kPi, kPi);
  CHECK(dm.perimeter() == doctest::Approx(drop_perimeter).epsilon(1e-10));
  for (double th : dm.theta) CHECK(std::abs(std::remainder(th - kPi, 2.0 * kPi)) > 0.0);
  CHECK(dm.grading == Grading::corner_graded);
}

TEST_CASE("layer operators on the unit circle have the known eigenvalues") {
  const BoundaryMesh mesh = discretize(ConformalMap::identity(), 256, Grading::none);
  const Eigen::MatrixXd h = hypersingular_matrix(mesh);
  const Eigen::MatrixXd ks = adjoint_double_layer_matrix(mesh);
  const Eigen::MatrixXd k = double_layer_matrix(mesh);
  const Eigen::MatrixXd s = single_layer_matrix(mesh);
  for (int m = 0; m <= 8; ++m) {
    Eigen::VectorXd f(mesh.size());
    for (int q = 0; q < mesh.size(); ++q) f(q) = std::cos(m * mesh.theta[q]);
    const double k_eig = m == 0 ? 0.5 : 0.0;
    const double s_eig = m == 0 ? 0.0 : -1.0 / (2.0 * m);
    CHECK((h * f - 0.5 * m * f).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((ks * f - k_eig * Eigen::VectorXd::Ones(mesh.size())).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((k * f - k_eig * Eigen::VectorXd::Ones(mesh.size())).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((s * f - s_eig * f).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("double layer of a constant density is the indicator of the inclusion") {
  const BoundaryMesh mesh = discretize(ConformalMap::ellipse(1.25, 0.75), 256, Grading::none);
  const std::vector<double> one(mesh.size(), 1.0);
  CHECK(std::abs(double_layer_potential(mesh, one, {3.0, 1.0})) < 1e-12);
  CHECK(double_layer_potential(mesh, one, {0.2, -0.1}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("perfect bonding tensors") {
  // Classical ellipse result: T = -pi (a + b) diag(a, b).
  const PolarizationTensor ell = PerfectSolver(discretize(ConformalMap::ellipse(1.25, 0.75), 256, Grading::none)).polarization();
  CHECK(ell(0, 0) == doctest::Approx(-kPi * 2.0 * 1.25).epsilon(1e-12));
  CHECK(ell(1, 1) == doctest::Approx(-kPi * 2.0 * 0.75).epsilon(1e-12));
  CHECK(std::abs(ell(0, 1)) < 1e-12);

  const ConformalMap lau = ConformalMap::laurent({{0.15, 0.05}, {0.0, 0.0}, {0.02, -0.01}});
  const PolarizationTensor t = PerfectSolver(discretize(lau, 256, Grading::none)).polarization();
  CHECK(norm(t.entries - perfect_from_b1(lau.b1())) < 1e-10);

  const ConformalMap drop = ConformalMap::droplet();
  const PolarizationTensor d = PerfectSolver(discretize(drop, 512, Grading::corner_graded)).polarization();
  CHECK(norm(d.entries - perfect_from_b1(drop.b1())) < 1e-3);
}

TEST_CASE("constant beta on the circle matches the analytic disk tensor") {
  const BoundaryMesh mesh = discretize(ConformalMap::identity(), 128, Grading::none);
  for (double b : {0.4, 1.0, 3.0}) {
    const PolarizationTensor t = polarization_general(mesh, std::vector<double>(mesh.size(), b));
    const double expected = 2.0 * kPi * (1.0 - b) / (1.0 + b);
    CHECK(t(0, 0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(t(1, 1) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(t(1, 0)) < 1e-12);
  }
}

TEST_CASE("two-harmonic beta on the circle agrees with the spectral solver") {
  const BoundaryMesh mesh = discretize(ConformalMap::identity(), 256, Grading::none);
  const ModeVector gamma = gamma_modes(1.4, -0.5, 0.7);
  std::vector<double> beta(mesh.size());
  for (int q = 0; q < mesh.size(); ++q) beta[q] = gamma.eval(mesh.theta[q]);
  const PolarizationTensor bem = polarization_general(mesh, beta);
  const PolarizationTensor spec = polarization(gamma, 128);
  CHECK(norm(bem.entries - spec.entries) < 1e-10);
  CHECK(bem.provenance == TensorSource::bem);
  CHECK(bem.resolution == 256);
}

TEST_CASE("ellipse tensor equals the disk tensor minus the shape term") {
  const ConformalMap map = ConformalMap::ellipse(1.25, 0.75);
  const InterfaceParameter p = InterfaceParameter::closed_form(map);
  const BoundaryMesh mesh = discretize(map, 256, Grading::none);
  const PolarizationTensor bem = polarization_general(mesh, beta_at_nodes(mesh, p));
  const PolarizationTensor disk = polarization(p.modes(), 128);
  const Mat2 shape{{{2.0 * kPi * 0.25, 0.0}, {0.0, -2.0 * kPi * 0.25}}};
  CHECK(norm(bem.entries - (disk.entries - shape)) < 1e-10);
}

TEST_CASE("zero forcing gives zero density") {
  for (const ConformalMap& map : {ConformalMap::identity(), ConformalMap::ellipse(1.25, 0.75), ConformalMap::droplet()}) {
    const BoundaryMesh mesh = discretize(map, 256, Grading::corner_graded);
    const InterfaceParameter p = InterfaceParameter::calibrated(map, 128);
    const ImperfectSolver s(mesh, beta_at_nodes(mesh, p));
    const DensitySolution sol = s.solve(0.0);
    CHECK(sol.psi.cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(s.condition_estimate() < 1e12);
  }
}

TEST_CASE("field evaluation guards and far field") {
  const ConformalMap map = ConformalMap::ellipse(1.25, 0.75);
  const BoundaryMesh mesh = discretize(map, 256, Grading::none);
  const ImperfectSolver s(mesh, std::vector<double>(mesh.size(), 0.5));
  const DensitySolution sol = s.solve({1.0, 0.0});
  CHECK(sol.residual < 1e-12);
  CHECK_THROWS_AS(s.eval_field(sol, {0.1, 0.1}), Error);
  CHECK_THROWS_AS(s.eval_field(sol, {1.2501, 0.0}), Error);

  // u - a.x -> <T a, x> / (2 pi |x|^2).
  const PolarizationTensor t = s.polarization();
  const Complex x = std::polar(400.0, 0.6);
  const double dipole = (t(0, 0) * x.real() + t(1, 0) * x.imag()) / (2.0 * kPi * std::norm(x));
  CHECK(s.eval_field(sol, x) - x.real() == doctest::Approx(dipole).epsilon(1e-2));
}

TEST_CASE("solver input validation") {
  const BoundaryMesh mesh = discretize(ConformalMap::identity(), 32, Grading::none);
  CHECK_THROWS_AS(ImperfectSolver(mesh, std::vector<double>(31, 1.0)), Error);
  CHECK_THROWS_AS(ImperfectSolver(mesh, std::vector<double>(32, -1.0)), Error);
  CHECK_THROWS_AS(ImperfectSolver(mesh, std::vector<double>(32, 0.0)), Error);
}

TEST_CASE("rigid motions carry the mesh") {
  const BoundaryMesh mesh = discretize(ConformalMap::ellipse(1.25, 0.75), 64, Grading::none);
  const BoundaryMesh moved = transformed(mesh, kPi / 2, {3.0, -2.0});
  for (int q = 0; q < mesh.size(); ++q) {
    CHECK(std::abs(moved.nodes[q] - (Complex(0.0, 1.0) * mesh.nodes[q] + Complex(3.0, -2.0))) < 1e-14);
    CHECK(std::abs(moved.normals[q] - Complex(0.0, 1.0) * mesh.normals[q]) < 1e-15);
    CHECK(moved.weights[q] == mesh.weights[q]);
  }
}

TEST_CASE("matrices do not depend on the worker count") {
  const BoundaryMesh mesh = discretize(ConformalMap::droplet(), 256, Grading::corner_graded);
  setenv("NI_THREADS", "1", 1);
  const Eigen::MatrixXd serial = hypersingular_matrix(mesh) + single_layer_matrix(mesh);
  setenv("NI_THREADS", "3", 1);
  const Eigen::MatrixXd threaded = hypersingular_matrix(mesh) + single_layer_matrix(mesh);
  unsetenv("NI_THREADS");
  CHECK((serial - threaded).cwiseAbs().maxCoeff() == 0.0);
}
