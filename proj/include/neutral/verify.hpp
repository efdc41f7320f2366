#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "neutral/bem.hpp"
#include "neutral/conformal.hpp"
#include "neutral/interface.hpp"
#include "neutral/tensor.hpp"

namespace neutral {

using FieldEvaluator = std::function<double(Complex)>;

/// Perturbations below this are indistinguishable from exact neutrality.
inline constexpr double kPerturbationFloor = 1e-13;

struct DecayFit {
  std::vector<double> radii;
  std::vector<double> max_perturbation;  // max over 64 angles of |u - a.x|
  double slope = 0.0;                    // least-squares slope of log perturbation vs log r
  double slope_halfwidth = 0.0;          // 95% confidence half-width
  bool below_floor = false;              // fewer than two radii above the floor; no fit
};

/// Measures how fast u(x) - a.x decays along circles |x - center| = r.
/// Needs at least four strictly increasing radii.
DecayFit farfield_decay(const FieldEvaluator& u, Complex a, std::span<const double> radii,
                        Complex center = {});

struct CrossCheck {
  double max_relative_difference = 0.0;  // max |u_bem - u_spectral| / max(1, |u|)
  int compared = 0;
  int skipped = 0;  // failed inversion, preimage inside |zeta| < 1.1, or inside the corner sector
};

/// Compares the BEM field on the physical boundary with the spectral disk
/// field pulled back through the map, u(z) = U(Phi^{-1}(z)). Points whose
/// preimage angle lies within `corner_sector` of a corner are skipped.
CrossCheck oracle_crosscheck(const InterfaceParameter& param, const BoundaryMesh& mesh,
                             std::span<const double> beta, std::span<const Complex> points,
                             Complex a, int N, double corner_sector = 0.0);

/// Deterministic points in the annulus rmin <= |z| <= rmax (golden-ratio sequence).
std::vector<Complex> annulus_points(int count, double rmin, double rmax);

struct InvarianceDeviation {
  double translation = 0.0;  // ||T(Omega + t) - T(Omega)||
  double rotation = 0.0;     // ||T(R Omega) - R T(Omega) R^T||
};

/// Empty beta selects perfect bonding.
InvarianceDeviation pt_invariance(const BoundaryMesh& mesh, std::span<const double> beta,
                                  double angle, Complex shift);

/// Boundary point with outward unit normal; planar samples leave the third
/// components at zero.
struct BoundarySample {
  std::array<double, 3> x{};
  std::array<double, 3> normal{};
};

struct GeometryResidual {
  int dimension = 2;
  std::array<double, 3> a{1.0, 1.0, 1.0};
  std::vector<std::array<double, 3>> ratios;  // a_j nu_j / x_j at the samples that were used
  double residual = 0.0;                      // max spread / mean magnitude
  int used = 0;
  int skipped = 0;  // samples with some |x_j| below the axis cutoff
};

inline constexpr double kAxisCutoff = 1e-3;

/// Sampled form of the ellipse condition a_1 nu_1 / x_1 = a_2 nu_2 / x_2 (= a_3 nu_3 / x_3).
/// The residual is the largest per-sample spread max_jk |r_j - r_k|, divided by
/// the mean |r_j| over all samples and coordinates.
GeometryResidual ellipsoid_residual(std::span<const BoundarySample> samples, int dimension,
                                    std::array<double, 3> a);

struct BestFitResidual {
  std::array<double, 3> a{1.0, 1.0, 1.0};
  GeometryResidual residual;
};

/// Planar: minimizes the residual over a_1/a_2 (a_2 = 1) on a log grid over
/// [1e-2, 1e2], refined by golden-section search around the best grid point.
BestFitResidual best_fit_ellipsoid_residual(std::span<const BoundarySample> samples);

/// Surfaces: a is the least-squares null vector of the linear conditions
/// a_j r_j - a_k r_k = 0 (r_j = nu_j / x_j), scaled so that a_3 = 1.
BestFitResidual best_fit_ellipsoid_residual_3d(std::span<const BoundarySample> samples);

std::vector<BoundarySample> ellipse_samples(double c1, double c2, int count);
std::vector<BoundarySample> ellipsoid_samples(double c1, double c2, double c3, int n_polar,
                                              int n_azimuth);
/// Boundary of a map translated so that the enclosed area has its centroid at
/// the origin. Corner points (zero normal) are omitted.
std::vector<BoundarySample> curve_samples(const ConformalMap& map, int count);

struct NeutralityGap {
  PolarizationTensor weak;
  PolarizationTensor perfect;
  double ratio = 0.0;  // ||T_weak|| / ||T_perfect||
  std::array<DecayFit, 2> decay_weak;     // a = e_1, e_2
  std::array<DecayFit, 2> decay_perfect;  // a = e_1, e_2
};

NeutralityGap neutrality_gap(const BoundaryMesh& mesh, const InterfaceParameter& param,
                             std::span<const double> radii);

}  // namespace neutral
