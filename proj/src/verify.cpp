#include "neutral/verify.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <Eigen/Dense>

#include "neutral/disk_spectral.hpp"

namespace neutral {

namespace {

constexpr int kDecayAngles = 64;

PolarizationTensor tensor_for(const BoundaryMesh& mesh, std::span<const double> beta) {
  if (beta.empty()) return PerfectSolver(mesh).polarization();
  return polarization_general(mesh, beta);
}

double dot(Complex a, Complex b) { return a.real() * b.real() + a.imag() * b.imag(); }

bool near_corner(const ConformalMap& map, double angle, double sector) {
  for (double c : map.corner_angles()) {
    if (std::abs(std::remainder(angle - c, 2.0 * kPi)) < sector) return true;
  }
  return false;
}

}  // namespace

DecayFit farfield_decay(const FieldEvaluator& u, Complex a, std::span<const double> radii, Complex center) {
  if (radii.size() < 4) throw Error("far-field decay needs at least four radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] > radii[i - 1]))) {
      throw Error("far-field radii must be positive and strictly increasing");
    }
  }

  DecayFit fit;
  fit.radii.assign(radii.begin(), radii.end());
  for (double r : radii) {
    double worst = 0.0;
    for (int k = 0; k < kDecayAngles; ++k) {
      const Complex x = center + std::polar(r, 2.0 * kPi * k / kDecayAngles);
      worst = std::max(worst, std::abs(u(x) - dot(a, x)));
    }
    fit.max_perturbation.push_back(worst);
  }

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (fit.max_perturbation[i] > kPerturbationFloor) {
      lx.push_back(std::log(radii[i]));
      ly.push_back(std::log(fit.max_perturbation[i]));
    }
  }
  if (lx.size() < 2) {
    fit.below_floor = true;
    return fit;
  }

  const double m = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / m;
    my += ly[i] / m;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  if (lx.size() > 2) {
    double ss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double r = ly[i] - (my + fit.slope * (lx[i] - mx));
      ss += r * r;
    }
    const double dof = m - 2.0;
    const boost::math::students_t dist(dof);
    fit.slope_halfwidth = boost::math::quantile(dist, 0.975) * std::sqrt(ss / dof / sxx);
  }
  return fit;
}

CrossCheck oracle_crosscheck(const InterfaceParameter& param, const BoundaryMesh& mesh,
                             std::span<const double> beta, std::span<const Complex> points, Complex a,
                             int N, double corner_sector) {
  const ImperfectSolver solver(mesh, std::vector<double>(beta.begin(), beta.end()));
  const DensitySolution sol = solver.solve(a);
  const ModeVector gamma = param.modes();
  const ModeVector density = solve_dense(gamma, N, a);

  CrossCheck out;
  for (const Complex& z : points) {
    Complex zeta;
    try {
      zeta = param.map().invert(z);
    } catch (const Error&) {
      ++out.skipped;
      continue;
    }
    if (std::abs(zeta) < 1.1 || (corner_sector > 0.0 && near_corner(param.map(), std::arg(zeta), corner_sector))) {
      ++out.skipped;
      continue;
    }
    double ub;
    try {
      ub = solver.eval_field(sol, z);
    } catch (const Error&) {
      ++out.skipped;
      continue;
    }
    const double us = eval_disk_field(density, gamma, a, zeta);
    out.max_relative_difference = std::max(out.max_relative_difference, std::abs(ub - us) / std::max(1.0, std::abs(us)));
    ++out.compared;
  }
  return out;
}

std::vector<Complex> annulus_points(int count, double rmin, double rmax) {
  if (count < 1 || !(rmin > 0.0) || !(rmax >= rmin)) throw Error("annulus_points: bad arguments");
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  std::vector<Complex> pts;
  pts.reserve(count);
  for (int k = 0; k < count; ++k) {
    // Radii equidistributed in area, angles along the golden-ratio sequence.
    const double s = (k + 0.5) / count;
    const double r = std::sqrt(rmin * rmin + s * (rmax * rmax - rmin * rmin));
    const double frac = std::fmod(k * golden, 1.0);
    pts.push_back(std::polar(r, 2.0 * kPi * frac));
  }
  return pts;
}

InvarianceDeviation pt_invariance(const BoundaryMesh& mesh, std::span<const double> beta, double angle,
                                  Complex shift) {
  const Mat2 base = tensor_for(mesh, beta).entries;
  const Mat2 moved = tensor_for(transformed(mesh, 0.0, shift), beta).entries;
  const Mat2 turned = tensor_for(transformed(mesh, angle, {}), beta).entries;
  const Mat2 r = rotation(angle);
  InvarianceDeviation d;
  d.translation = norm(moved - base);
  d.rotation = norm(turned - r * base * transpose(r));
  return d;
}

GeometryResidual ellipsoid_residual(std::span<const BoundarySample> samples, int dimension,
                                    std::array<double, 3> a) {
  if (dimension != 2 && dimension != 3) throw Error("ellipsoid residual is defined in 2 or 3 dimensions");
  for (int j = 0; j < dimension; ++j) {
    if (!(a[j] > 0.0)) throw Error("ellipsoid residual constants must be positive");
  }
  GeometryResidual g;
  g.dimension = dimension;
  g.a = a;
  if (dimension == 2) g.a[2] = 0.0;

  std::vector<double> spreads;
  double total = 0.0;
  for (const BoundarySample& s : samples) {
    bool clear = true;
    for (int j = 0; j < dimension; ++j) clear = clear && std::abs(s.x[j]) >= kAxisCutoff;
    if (!clear) {
      ++g.skipped;
      continue;
    }
    std::array<double, 3> r{};
    for (int j = 0; j < dimension; ++j) {
      r[j] = a[j] * s.normal[j] / s.x[j];
      total += std::abs(r[j]);
    }
    double spread = 0.0;
    for (int j = 0; j < dimension; ++j)
      for (int k = j + 1; k < dimension; ++k) spread = std::max(spread, std::abs(r[j] - r[k]));
    g.ratios.push_back(r);
    spreads.push_back(spread);
    ++g.used;
  }
  if (g.used == 0) throw Error("no boundary samples clear the coordinate-axis cutoff");
  const double mean = total / (static_cast<double>(g.used) * dimension);
  for (double sp : spreads) g.residual = std::max(g.residual, mean > 0.0 ? sp / mean : sp);
  return g;
}

BestFitResidual best_fit_ellipsoid_residual(std::span<const BoundarySample> samples) {
  auto f = [&](double log_ratio) {
    return ellipsoid_residual(samples, 2, {std::pow(10.0, log_ratio), 1.0, 1.0}).residual;
  };
  constexpr int kGrid = 81;
  constexpr double lo = -2.0, hi = 2.0, step = (hi - lo) / (kGrid - 1);
  int best = 0;
  double best_value = f(lo);
  for (int i = 1; i < kGrid; ++i) {
    const double v = f(lo + i * step);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }

  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double left = lo + std::max(0, best - 1) * step;
  double right = lo + std::min(kGrid - 1, best + 1) * step;
  double c = right - invphi * (right - left), d = left + invphi * (right - left);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      right = d;
      d = c;
      fd = fc;
      c = right - invphi * (right - left);
      fc = f(c);
    } else {
      left = c;
      c = d;
      fc = fd;
      d = left + invphi * (right - left);
      fd = f(d);
    }
  }
  double lr = 0.5 * (left + right);
  if (best_value < f(lr)) lr = lo + best * step;

  BestFitResidual out;
  out.a = {std::pow(10.0, lr), 1.0, 0.0};
  out.residual = ellipsoid_residual(samples, 2, out.a);
  return out;
}

BestFitResidual best_fit_ellipsoid_residual_3d(std::span<const BoundarySample> samples) {
  std::vector<std::array<double, 3>> rows;
  for (const BoundarySample& s : samples) {
    if (std::abs(s.x[0]) < kAxisCutoff || std::abs(s.x[1]) < kAxisCutoff || std::abs(s.x[2]) < kAxisCutoff) continue;
    const double r[3] = {s.normal[0] / s.x[0], s.normal[1] / s.x[1], s.normal[2] / s.x[2]};
    // Normalize each sample so that near-axis points do not dominate the fit.
    const double scale = std::abs(r[0]) + std::abs(r[1]) + std::abs(r[2]);
    rows.push_back({r[0] / scale, -r[1] / scale, 0.0});
    rows.push_back({0.0, r[1] / scale, -r[2] / scale});
  }
  if (rows.empty()) throw Error("no boundary samples clear the coordinate-axis cutoff");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < 3; ++j) m(static_cast<Eigen::Index>(i), j) = rows[i][j];
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
  // A non-ellipsoid may give mixed signs; the magnitudes still make a valid
  // (and large) residual, so fall back to them rather than fail.
  Eigen::Vector3d v = svd.matrixV().col(2).cwiseAbs();
  if (!(v.minCoeff() > 0.0)) v.setOnes();
  v /= v(2);

  BestFitResidual out;
  out.a = {v(0), v(1), 1.0};
  out.residual = ellipsoid_residual(samples, 3, out.a);
  return out;
}

std::vector<BoundarySample> ellipse_samples(double c1, double c2, int count) {
  if (!(c1 > 0.0) || !(c2 > 0.0) || count < 1) throw Error("ellipse_samples: bad arguments");
  std::vector<BoundarySample> out(count);
  for (int k = 0; k < count; ++k) {
    const double t = 2.0 * kPi * (k + 0.5) / count;
    const double x1 = c1 * std::cos(t), x2 = c2 * std::sin(t);
    const double n1 = x1 / (c1 * c1), n2 = x2 / (c2 * c2), len = std::hypot(n1, n2);
    out[k].x = {x1, x2, 0.0};
    out[k].normal = {n1 / len, n2 / len, 0.0};
  }
  return out;
}

std::vector<BoundarySample> ellipsoid_samples(double c1, double c2, double c3, int n_polar, int n_azimuth) {
  if (!(c1 > 0.0) || !(c2 > 0.0) || !(c3 > 0.0) || n_polar < 1 || n_azimuth < 1) {
    throw Error("ellipsoid_samples: bad arguments");
  }
  std::vector<BoundarySample> out;
  out.reserve(static_cast<std::size_t>(n_polar) * n_azimuth);
  for (int i = 0; i < n_polar; ++i) {
    const double phi = kPi * (i + 0.5) / n_polar;
    for (int k = 0; k < n_azimuth; ++k) {
      const double th = 2.0 * kPi * (k + 0.5) / n_azimuth;
      BoundarySample s;
      s.x = {c1 * std::sin(phi) * std::cos(th), c2 * std::sin(phi) * std::sin(th), c3 * std::cos(phi)};
      const double n1 = s.x[0] / (c1 * c1), n2 = s.x[1] / (c2 * c2), n3 = s.x[2] / (c3 * c3);
      const double len = std::sqrt(n1 * n1 + n2 * n2 + n3 * n3);
      s.normal = {n1 / len, n2 / len, n3 / len};
      out.push_back(s);
    }
  }
  return out;
}

std::vector<BoundarySample> curve_samples(const ConformalMap& map, int count) {
  if (count < 16) throw Error("curve_samples needs at least 16 points");
  // Area centroid of the fine boundary polygon.
  const std::vector<Complex> poly = sample_boundary(map, std::max(count, 4096));
  double area2 = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Complex p = poly[i], q = poly[(i + 1) % poly.size()];
    const double cross = p.real() * q.imag() - q.real() * p.imag();
    area2 += cross;
    cx += (p.real() + q.real()) * cross;
    cy += (p.imag() + q.imag()) * cross;
  }
  const Complex centroid(cx / (3.0 * area2), cy / (3.0 * area2));

  std::vector<BoundarySample> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double th = 2.0 * kPi * (k + 0.5) / count;
    const Complex zeta = std::polar(1.0, th);
    const Complex dphi = map.derivative(zeta);
    if (std::abs(dphi) < 1e-12) continue;
    const Complex x = map(zeta) - centroid;
    const Complex nu = zeta * dphi / std::abs(dphi);
    BoundarySample s;
    s.x = {x.real(), x.imag(), 0.0};
    s.normal = {nu.real(), nu.imag(), 0.0};
    out.push_back(s);
  }
  return out;
}

NeutralityGap neutrality_gap(const BoundaryMesh& mesh, const InterfaceParameter& param,
                             std::span<const double> radii) {
  const ImperfectSolver weak(mesh, beta_at_nodes(mesh, param));
  const PerfectSolver perfect(mesh);
  NeutralityGap gap;
  gap.weak = weak.polarization();
  gap.perfect = perfect.polarization();
  gap.ratio = gap.weak.norm() / gap.perfect.norm();

  const Complex dirs[2] = {{1.0, 0.0}, {0.0, 1.0}};
  for (int j = 0; j < 2; ++j) {
    const DensitySolution ws = weak.solve(dirs[j]);
    const DensitySolution ps = perfect.solve(dirs[j]);
    gap.decay_weak[j] = farfield_decay([&](Complex x) { return weak.eval_field(ws, x); }, dirs[j], radii);
    gap.decay_perfect[j] = farfield_decay([&](Complex x) { return perfect.eval_field(ps, x); }, dirs[j], radii);
  }
  return gap;
}

}  // namespace neutral
