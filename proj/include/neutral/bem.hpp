#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "neutral/conformal.hpp"
#include "neutral/interface.hpp"
#include "neutral/tensor.hpp"

namespace neutral {

enum class Grading { none, corner_graded };

/// Nystrom discretization of the inclusion boundary.
///
/// Nodes sit at equispaced parameter values t_q = 2 pi (q + 1/2) / n. Without
/// grading theta = t; with grading theta = corner + w(t), where w is the
/// order-4 polynomial substitution of Kress, so nodes cluster toward the
/// corner and the corner itself is never a node. All periodic quadrature and
/// spectral differentiation happens in t.
struct BoundaryMesh {
  std::vector<double> param;       // t_q
  std::vector<double> theta;       // preimage angle on the unit circle
  std::vector<Complex> nodes;      // x_q
  std::vector<Complex> normals;    // outward unit normals
  std::vector<Complex> tangents;   // unit tangents (counter-clockwise)
  std::vector<double> speed;       // |dx/dt|
  std::vector<double> curvature;   // signed, positive on convex arcs
  std::vector<double> weights;     // speed * 2 pi / n
  std::vector<double> corner_angles;
  Grading grading = Grading::none;

  int size() const { return static_cast<int>(nodes.size()); }
  double perimeter() const;
  /// Largest distance between consecutive nodes.
  double max_spacing() const;
  /// Winding-number test against the node polygon.
  bool contains(Complex x) const;
  double distance_to_boundary(Complex x) const;
};

BoundaryMesh discretize(const ConformalMap& map, int n, Grading grading);

/// Rigid motion x -> R(angle) x + shift; parameters, weights and nodal data carry over.
BoundaryMesh transformed(const BoundaryMesh& mesh, double angle, Complex shift);

/// beta at the mesh nodes; never evaluated at a corner.
std::vector<double> beta_at_nodes(const BoundaryMesh& mesh, const InterfaceParameter& param);

// ---------------------------------------------------------------------------
// Boundary operators as dense Nystrom matrices.

/// K*[phi](x) = p.v. int d/dnu_x Gamma(x - y) phi(y) ds(y).
Eigen::MatrixXd adjoint_double_layer_matrix(const BoundaryMesh& mesh);
/// K[phi](x) = p.v. int d/dnu_y Gamma(x - y) phi(y) ds(y).
Eigen::MatrixXd double_layer_matrix(const BoundaryMesh& mesh);
/// Single layer S with Kress' product quadrature for the log singularity.
Eigen::MatrixXd single_layer_matrix(const BoundaryMesh& mesh);
/// Normal derivative of the double layer, d/ds S[d/ds phi].
Eigen::MatrixXd hypersingular_matrix(const BoundaryMesh& mesh);
/// Periodic spectral differentiation in the mesh parameter t.
Eigen::MatrixXd spectral_derivative_matrix(int n);

Eigen::VectorXd apply_adjoint_double_layer(const BoundaryMesh& mesh, std::span<const double> density);
Eigen::VectorXd apply_hypersingular(const BoundaryMesh& mesh, std::span<const double> density);

/// Double-layer potential evaluated off the boundary.
double double_layer_potential(const BoundaryMesh& mesh, std::span<const double> density, Complex x);

// ---------------------------------------------------------------------------

struct DensitySolution {
  Eigen::VectorXd psi;          // density at nodes
  double lambda = 0.0;          // boundary constant of the interface law / perfect conductor
  double multiplier = 0.0;      // bordering unknown; zero in exact arithmetic
  std::vector<double> beta;     // beta at nodes (empty for perfect bonding)
  Complex direction;            // a = a_1 + i a_2
  double residual = 0.0;        // relative residual of the bordered system
};

/// Imperfect-interface solver: factors the bordered system
///
///     [ (1/2 I - K*) M_beta + d/dnu D    1 ] [psi]   [-a.nu]
///     [          (beta w)^T              0 ] [ mu] = [  0  ]
///
/// once and solves for any direction a.
class ImperfectSolver {
 public:
  ImperfectSolver(const BoundaryMesh& mesh, std::vector<double> beta);

  DensitySolution solve(Complex a) const;
  double condition_estimate() const { return condition_; }
  const BoundaryMesh& mesh() const { return mesh_; }
  std::span<const double> beta() const { return beta_; }

  /// u(x) = a.x - S[beta psi](x) + D[psi](x).
  double eval_field(const DensitySolution& sol, Complex x) const;

  PolarizationTensor polarization() const;

 private:
  BoundaryMesh mesh_;
  std::vector<double> beta_;
  Eigen::MatrixXd system_;
  Eigen::VectorXd row_scale_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Eigen::MatrixXd double_layer_;
  Eigen::MatrixXd single_layer_;
  double condition_ = 0.0;
};

/// Perfect bonding: u = a.x + S[phi], u = lambda on the boundary, int phi ds = 0.
class PerfectSolver {
 public:
  explicit PerfectSolver(const BoundaryMesh& mesh);

  DensitySolution solve(Complex a) const;
  double condition_estimate() const { return condition_; }
  double eval_field(const DensitySolution& sol, Complex x) const;
  /// T_ij = -int y_i phi_j ds.
  PolarizationTensor polarization() const;

 private:
  BoundaryMesh mesh_;
  Eigen::MatrixXd system_;
  Eigen::VectorXd col_scale_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double condition_ = 0.0;
};

DensitySolution solve_imperfect(const BoundaryMesh& mesh, std::span<const double> beta, Complex a);
DensitySolution solve_perfect(const BoundaryMesh& mesh, Complex a);

PolarizationTensor polarization_general(const BoundaryMesh& mesh, std::span<const double> beta);

/// Evaluation points must be outside and at least two node spacings from the boundary.
void require_evaluable(const BoundaryMesh& mesh, Complex x);

}  // namespace neutral
