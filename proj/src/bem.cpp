#include "neutral/bem.hpp"

#include <algorithm>
#include <sstream>

#include "neutral/parallel.hpp"

namespace neutral {

namespace {

constexpr double kInv2Pi = 1.0 / (2.0 * kPi);
constexpr int kGradingOrder = 4;
constexpr double kMaxCondition = 1e12;

double dot(Complex a, Complex b) { return a.real() * b.real() + a.imag() * b.imag(); }

// Squared node separation below which two distinct nodes are treated as coincident.
// Only the two flanks of a cusp get this close; their weights are negligible there.
double coincidence_floor(const BoundaryMesh& mesh) {
  double extent = 0.0;
  for (const Complex& x : mesh.nodes) extent = std::max(extent, std::abs(x));
  const double eps = 1e-15 * std::max(1.0, extent);
  return eps * eps;
}

// Kress' sigmoidal substitution on [0, 2 pi]: w(0) = 0, w(2 pi) = 2 pi, and the
// first p - 1 derivatives vanish at both ends.
struct Grader {
  double p = kGradingOrder;

  double v(double t) const {
    const double s = (kPi - t) / kPi;
    return (1.0 / p - 0.5) * s * s * s + (1.0 / p) * (t - kPi) / kPi + 0.5;
  }
  double dv(double t) const {
    const double s = (kPi - t) / kPi;
    return -3.0 * (1.0 / p - 0.5) * s * s / kPi + 1.0 / (p * kPi);
  }
  double w(double t) const {
    const double a = std::pow(v(t), p), b = std::pow(1.0 - v(t), p);
    return 2.0 * kPi * a / (a + b);
  }
  double dw(double t) const {
    const double vt = v(t);
    const double a = std::pow(vt, p), b = std::pow(1.0 - vt, p);
    return 2.0 * kPi * p * dv(t) * std::pow(vt, p - 1) * std::pow(1.0 - vt, p - 1) / ((a + b) * (a + b));
  }
};

// Weights of the trapezoid-type product rule for int_0^{2pi} log(4 sin^2((t-s)/2)) f(s) ds
// on n equispaced nodes, as a function of the index offset m = p - q.
std::vector<double> kress_log_weights(int n) {
  const int half = n / 2;
  std::vector<double> r(n);
  for (int m = 0; m < n; ++m) {
    double acc = 0.0;
    for (int k = 1; k < half; ++k) acc += std::cos(2.0 * kPi * k * m / n) / k;
    r[m] = -(4.0 * kPi / n) * acc - (4.0 * kPi / (double(n) * n)) * ((m % 2) ? -1.0 : 1.0);
  }
  return r;
}

// S in parameter form, without the speed factor of ds: entry (p, q) integrates
// Gamma(x_p - x(s)) against a function of s sampled at node q.
Eigen::MatrixXd single_layer_param(const BoundaryMesh& mesh) {
  const int n = mesh.size();
  const std::vector<double> r = kress_log_weights(n);
  const double h = 2.0 * kPi / n;
  const double floor2 = coincidence_floor(mesh);
  Eigen::MatrixXd s(n, n);
  parallel_for(n, [&](std::size_t pi) {
    const int p = static_cast<int>(pi);
    for (int q = 0; q < n; ++q) {
      const int m = ((p - q) % n + n) % n;
      double smooth;
      if (p == q) {
        smooth = std::log(mesh.speed[p]);
      } else {
        const double sn = std::sin(0.5 * (mesh.param[p] - mesh.param[q]));
        const double r2 = std::max(std::norm(mesh.nodes[p] - mesh.nodes[q]), floor2);
        smooth = 0.5 * std::log(r2 / (4.0 * sn * sn));
      }
      s(p, q) = kInv2Pi * (0.5 * r[m] + h * smooth);
    }
  });
  return s;
}

void check_condition(double cond, const char* what) {
  if (!(cond < kMaxCondition)) {
    std::ostringstream msg;
    msg << what << " is ill-conditioned (condition estimate " << cond << ")";
    throw Error(msg.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

double BoundaryMesh::perimeter() const {
  double acc = 0.0;
  for (double w : weights) acc += w;
  return acc;
}

double BoundaryMesh::max_spacing() const {
  double m = 0.0;
  for (int q = 0; q < size(); ++q) m = std::max(m, std::abs(nodes[(q + 1) % size()] - nodes[q]));
  return m;
}

bool BoundaryMesh::contains(Complex x) const {
  double winding = 0.0;
  for (int q = 0; q < size(); ++q) {
    winding += std::arg((nodes[(q + 1) % size()] - x) / (nodes[q] - x));
  }
  return std::abs(winding) > kPi;
}

double BoundaryMesh::distance_to_boundary(Complex x) const {
  double d = std::numeric_limits<double>::infinity();
  for (int q = 0; q < size(); ++q) {
    // Distance to the chord between consecutive nodes.
    const Complex a = nodes[q], b = nodes[(q + 1) % size()];
    const Complex ab = b - a;
    const double len2 = std::norm(ab);
    double t = len2 > 0 ? dot(x - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    d = std::min(d, std::abs(x - (a + t * ab)));
  }
  return d;
}

BoundaryMesh discretize(const ConformalMap& map, int n, Grading grading) {
  if (n < 16 || n % 2 != 0) throw Error("mesh size n must be even and at least 16");
  if (map.has_corners() && grading == Grading::none) {
    throw Error("map has a corner; use the corner-graded mesh");
  }
  if (map.corner_angles().size() > 1) throw Error("graded meshes support a single corner");
  const bool graded = grading == Grading::corner_graded && map.has_corners();

  BoundaryMesh mesh;
  mesh.grading = graded ? Grading::corner_graded : Grading::none;
  mesh.corner_angles.assign(map.corner_angles().begin(), map.corner_angles().end());
  mesh.param.resize(n);
  mesh.theta.resize(n);
  mesh.nodes.resize(n);
  mesh.normals.resize(n);
  mesh.tangents.resize(n);
  mesh.speed.resize(n);
  mesh.curvature.resize(n);
  mesh.weights.resize(n);

  const Grader grader;
  const double h = 2.0 * kPi / n;
  for (int q = 0; q < n; ++q) {
    const double t = h * (q + 0.5);
    double theta = t, dtheta = 1.0;
    if (graded) {
      theta = mesh.corner_angles.front() + grader.w(t);
      dtheta = grader.dw(t);
    }
    theta = std::remainder(theta, 2.0 * kPi);
    const Complex zeta = std::polar(1.0, theta);
    const Complex d1 = map.derivative(zeta);
    const Complex d2 = map.second_derivative(zeta);
    const Complex x_theta = Complex(0.0, 1.0) * zeta * d1;
    const Complex x_theta2 = -zeta * d1 - zeta * zeta * d2;
    const double jac = std::abs(x_theta);

    mesh.param[q] = t;
    mesh.theta[q] = theta;
    mesh.nodes[q] = map(zeta);
    mesh.tangents[q] = x_theta / jac;
    mesh.normals[q] = Complex(0.0, -1.0) * mesh.tangents[q];
    mesh.speed[q] = jac * dtheta;
    mesh.curvature[q] = (std::conj(x_theta) * x_theta2).imag() / (jac * jac * jac);
    mesh.weights[q] = mesh.speed[q] * h;
  }
  return mesh;
}

BoundaryMesh transformed(const BoundaryMesh& mesh, double angle, Complex shift) {
  BoundaryMesh out = mesh;
  const Complex rot = std::polar(1.0, angle);
  for (int q = 0; q < out.size(); ++q) {
    out.nodes[q] = rot * mesh.nodes[q] + shift;
    out.normals[q] = rot * mesh.normals[q];
    out.tangents[q] = rot * mesh.tangents[q];
  }
  return out;
}

std::vector<double> beta_at_nodes(const BoundaryMesh& mesh, const InterfaceParameter& param) {
  std::vector<double> beta(mesh.size());
  for (int q = 0; q < mesh.size(); ++q) beta[q] = param.beta(mesh.theta[q]);
  return beta;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd adjoint_double_layer_matrix(const BoundaryMesh& mesh) {
  const int n = mesh.size();
  const double floor2 = coincidence_floor(mesh);
  Eigen::MatrixXd k(n, n);
  parallel_for(n, [&](std::size_t pi) {
    const int p = static_cast<int>(pi);
    for (int q = 0; q < n; ++q) {
      if (p == q) {
        // Smooth-curve limit of (x - y).nu_x / |x - y|^2 is kappa(x) / 2.
        k(p, q) = kInv2Pi * 0.5 * mesh.curvature[p] * mesh.weights[q];
      } else {
        const Complex d = mesh.nodes[p] - mesh.nodes[q];
        const double r2 = std::norm(d);
        k(p, q) = r2 > floor2 ? kInv2Pi * dot(d, mesh.normals[p]) / r2 * mesh.weights[q] : 0.0;
      }
    }
  });
  return k;
}

Eigen::MatrixXd double_layer_matrix(const BoundaryMesh& mesh) {
  const int n = mesh.size();
  const double floor2 = coincidence_floor(mesh);
  Eigen::MatrixXd k(n, n);
  parallel_for(n, [&](std::size_t pi) {
    const int p = static_cast<int>(pi);
    for (int q = 0; q < n; ++q) {
      if (p == q) {
        // (y - x).nu_y / |x - y|^2 has the same kappa / 2 limit.
        k(p, q) = kInv2Pi * 0.5 * mesh.curvature[p] * mesh.weights[q];
      } else {
        const Complex d = mesh.nodes[q] - mesh.nodes[p];
        const double r2 = std::norm(d);
        k(p, q) = r2 > floor2 ? kInv2Pi * dot(d, mesh.normals[q]) / r2 * mesh.weights[q] : 0.0;
      }
    }
  });
  return k;
}

Eigen::MatrixXd single_layer_matrix(const BoundaryMesh& mesh) {
  Eigen::MatrixXd s = single_layer_param(mesh);
  for (int q = 0; q < mesh.size(); ++q) s.col(q) *= mesh.speed[q];
  return s;
}

Eigen::MatrixXd spectral_derivative_matrix(int n) {
  if (n % 2 != 0) throw Error("spectral differentiation needs an even node count");
  const double h = 2.0 * kPi / n;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      if (p == q) continue;
      const int m = p - q;
      d(p, q) = 0.5 * ((m % 2) ? -1.0 : 1.0) / std::tan(0.5 * m * h);
    }
  }
  return d;
}

Eigen::MatrixXd hypersingular_matrix(const BoundaryMesh& mesh) {
  // d/dnu D[phi] = d/ds S[d phi/ds]. With ds = |x'| dt the speed factors of
  // d/ds and of the quadrature weight cancel inside S, leaving
  //     (1/|x'|) Dt S_param Dt.
  const Eigen::MatrixXd dt = spectral_derivative_matrix(mesh.size());
  Eigen::MatrixXd h = dt * (single_layer_param(mesh) * dt);
  for (int p = 0; p < mesh.size(); ++p) h.row(p) /= mesh.speed[p];
  return h;
}

Eigen::VectorXd apply_adjoint_double_layer(const BoundaryMesh& mesh, std::span<const double> density) {
  const Eigen::Map<const Eigen::VectorXd> f(density.data(), static_cast<Eigen::Index>(density.size()));
  return adjoint_double_layer_matrix(mesh) * f;
}

Eigen::VectorXd apply_hypersingular(const BoundaryMesh& mesh, std::span<const double> density) {
  const Eigen::Map<const Eigen::VectorXd> f(density.data(), static_cast<Eigen::Index>(density.size()));
  return hypersingular_matrix(mesh) * f;
}

double double_layer_potential(const BoundaryMesh& mesh, std::span<const double> density, Complex x) {
  double acc = 0.0;
  for (int q = 0; q < mesh.size(); ++q) {
    const Complex d = mesh.nodes[q] - x;
    acc += dot(d, mesh.normals[q]) / std::norm(d) * density[q] * mesh.weights[q];
  }
  return kInv2Pi * acc;
}

void require_evaluable(const BoundaryMesh& mesh, Complex x) {
  if (mesh.contains(x)) throw Error("evaluation point lies inside the inclusion");
  if (mesh.distance_to_boundary(x) < 2.0 * mesh.max_spacing()) {
    throw Error("evaluation point is closer than two mesh spacings to the boundary");
  }
}

// ---------------------------------------------------------------------------

ImperfectSolver::ImperfectSolver(const BoundaryMesh& mesh, std::vector<double> beta)
    : mesh_(mesh), beta_(std::move(beta)) {
  const int n = mesh_.size();
  if (static_cast<int>(beta_.size()) != n) throw Error("beta must have one value per node");
  bool any_positive = false;
  for (double b : beta_) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw Error("beta must be finite and non-negative");
    any_positive = any_positive || b > 0.0;
  }
  if (!any_positive) throw Error("beta must not vanish identically");

  const Eigen::Map<const Eigen::VectorXd> b(beta_.data(), n);
  const Eigen::MatrixXd kstar = adjoint_double_layer_matrix(mesh_);
  system_ = Eigen::MatrixXd::Zero(n + 1, n + 1);
  system_.topLeftCorner(n, n) = hypersingular_matrix(mesh_) - kstar * b.asDiagonal();
  system_.topLeftCorner(n, n).diagonal() += 0.5 * b;
  system_.topRightCorner(n, 1).setOnes();
  for (int q = 0; q < n; ++q) system_(n, q) = beta_[q] * mesh_.weights[q];

  // Rows near a graded corner carry 1/|x'| factors many orders of magnitude
  // apart, so equilibrate rows before factoring.
  row_scale_ = system_.cwiseAbs().rowwise().maxCoeff().cwiseInverse();
  lu_.compute(row_scale_.asDiagonal() * system_);
  condition_ = 1.0 / lu_.rcond();
  check_condition(condition_, "imperfect-interface system");

  double_layer_ = double_layer_matrix(mesh_);
  single_layer_ = single_layer_matrix(mesh_);
}

DensitySolution ImperfectSolver::solve(Complex a) const {
  const int n = mesh_.size();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  for (int q = 0; q < n; ++q) rhs(q) = -dot(a, mesh_.normals[q]);
  const Eigen::VectorXd x = lu_.solve(row_scale_.cwiseProduct(rhs));

  DensitySolution sol;
  sol.psi = x.head(n);
  sol.multiplier = x(n);
  sol.beta = beta_;
  sol.direction = a;
  const double scale = system_.cwiseAbs().rowwise().sum().maxCoeff() * x.cwiseAbs().maxCoeff() +
                       rhs.cwiseAbs().maxCoeff();
  sol.residual = scale > 0 ? (system_ * x - rhs).cwiseAbs().maxCoeff() / scale : 0.0;

  // Exterior trace u_+ = a.x - S[beta psi] + (-1/2 + K)[psi]; lambda is its beta-weighted mean.
  const Eigen::Map<const Eigen::VectorXd> b(beta_.data(), n);
  const Eigen::VectorXd bpsi = b.cwiseProduct(sol.psi);
  const Eigen::VectorXd trace = -(single_layer_ * bpsi) - 0.5 * sol.psi + double_layer_ * sol.psi;
  double num = 0.0, den = 0.0;
  for (int q = 0; q < n; ++q) {
    const double u = dot(a, mesh_.nodes[q]) + trace(q);
    num += beta_[q] * u * mesh_.weights[q];
    den += beta_[q] * mesh_.weights[q];
  }
  sol.lambda = num / den;
  return sol;
}

double ImperfectSolver::eval_field(const DensitySolution& sol, Complex x) const {
  require_evaluable(mesh_, x);
  double acc = 0.0;
  for (int q = 0; q < mesh_.size(); ++q) {
    const Complex d = mesh_.nodes[q] - x;
    const double r2 = std::norm(d);
    const double single = 0.5 * std::log(r2) * beta_[q];
    const double dbl = dot(d, mesh_.normals[q]) / r2;
    acc += (dbl - single) * sol.psi(q) * mesh_.weights[q];
  }
  return dot(sol.direction, x) + kInv2Pi * acc;
}

PolarizationTensor ImperfectSolver::polarization() const {
  PolarizationTensor t;
  t.provenance = TensorSource::bem;
  t.resolution = mesh_.size();
  const Complex dirs[2] = {{1.0, 0.0}, {0.0, 1.0}};
  for (int j = 0; j < 2; ++j) {
    const DensitySolution sol = solve(dirs[j]);
    double t1 = 0.0, t2 = 0.0;
    for (int q = 0; q < mesh_.size(); ++q) {
      const Complex y = mesh_.nodes[q];
      const Complex nu = mesh_.normals[q];
      const double pw = sol.psi(q) * mesh_.weights[q];
      t1 += (y.real() * beta_[q] - nu.real()) * pw;
      t2 += (y.imag() * beta_[q] - nu.imag()) * pw;
    }
    t.entries[0][j] = t1;
    t.entries[1][j] = t2;
  }
  return t;
}

// ---------------------------------------------------------------------------

PerfectSolver::PerfectSolver(const BoundaryMesh& mesh) : mesh_(mesh) {
  const int n = mesh_.size();
  system_ = Eigen::MatrixXd::Zero(n + 1, n + 1);
  system_.topLeftCorner(n, n) = single_layer_matrix(mesh_);
  system_.topRightCorner(n, 1).setConstant(-1.0);
  for (int q = 0; q < n; ++q) system_(n, q) = mesh_.weights[q];
  // Columns carry the quadrature weights, which span many decades on a graded mesh.
  col_scale_ = system_.cwiseAbs().colwise().maxCoeff().transpose().cwiseInverse();
  lu_.compute(system_ * col_scale_.asDiagonal());
  condition_ = 1.0 / lu_.rcond();
  check_condition(condition_, "perfect-bonding system");
}

DensitySolution PerfectSolver::solve(Complex a) const {
  const int n = mesh_.size();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  for (int q = 0; q < n; ++q) rhs(q) = -dot(a, mesh_.nodes[q]);
  const Eigen::VectorXd x = col_scale_.cwiseProduct(lu_.solve(rhs));
  DensitySolution sol;
  sol.psi = x.head(n);
  sol.lambda = x(n);
  sol.direction = a;
  const double scale = system_.cwiseAbs().rowwise().sum().maxCoeff() * x.cwiseAbs().maxCoeff() +
                       rhs.cwiseAbs().maxCoeff();
  sol.residual = scale > 0 ? (system_ * x - rhs).cwiseAbs().maxCoeff() / scale : 0.0;
  return sol;
}

double PerfectSolver::eval_field(const DensitySolution& sol, Complex x) const {
  require_evaluable(mesh_, x);
  double acc = 0.0;
  for (int q = 0; q < mesh_.size(); ++q) {
    acc += 0.5 * std::log(std::norm(mesh_.nodes[q] - x)) * sol.psi(q) * mesh_.weights[q];
  }
  return dot(sol.direction, x) + kInv2Pi * acc;
}

PolarizationTensor PerfectSolver::polarization() const {
  PolarizationTensor t;
  t.provenance = TensorSource::bem;
  t.resolution = mesh_.size();
  const Complex dirs[2] = {{1.0, 0.0}, {0.0, 1.0}};
  for (int j = 0; j < 2; ++j) {
    const DensitySolution sol = solve(dirs[j]);
    double t1 = 0.0, t2 = 0.0;
    for (int q = 0; q < mesh_.size(); ++q) {
      const double pw = sol.psi(q) * mesh_.weights[q];
      t1 -= mesh_.nodes[q].real() * pw;
      t2 -= mesh_.nodes[q].imag() * pw;
    }
    t.entries[0][j] = t1;
    t.entries[1][j] = t2;
  }
  return t;
}

DensitySolution solve_imperfect(const BoundaryMesh& mesh, std::span<const double> beta, Complex a) {
  return ImperfectSolver(mesh, std::vector<double>(beta.begin(), beta.end())).solve(a);
}

DensitySolution solve_perfect(const BoundaryMesh& mesh, Complex a) {
  return PerfectSolver(mesh).solve(a);
}

PolarizationTensor polarization_general(const BoundaryMesh& mesh, std::span<const double> beta) {
  return ImperfectSolver(mesh, std::vector<double>(beta.begin(), beta.end())).polarization();
}

}  // namespace neutral
