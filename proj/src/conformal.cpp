#include "neutral/conformal.hpp"

#include <algorithm>
#include <sstream>

namespace neutral {

namespace {

constexpr int kDropletTailTerms = 48;
constexpr int kInjectivitySamples = 4096;
constexpr int kNewtonMaxIter = 50;

void require_exterior(Complex zeta) {
  // Boundary points e^{i theta} carry rounding of a few ulps.
  if (std::abs(zeta) < 1.0 - 1e-12) {
    throw Error("conformal map evaluated inside the unit disk");
  }
}

double orient(Complex a, Complex b, Complex c) {
  return (b.real() - a.real()) * (c.imag() - a.imag()) -
         (b.imag() - a.imag()) * (c.real() - a.real());
}

bool segments_cross(Complex p1, Complex p2, Complex q1, Complex q2) {
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 &&
         d3 != 0 && d4 != 0;
}

}  // namespace

ConformalMap::ConformalMap(MapKind kind, std::vector<Complex> tail, std::vector<double> corners)
    : kind_(kind), tail_(std::move(tail)), corners_(std::move(corners)) {
  while (!tail_.empty() && tail_.back() == Complex{}) tail_.pop_back();
}

ConformalMap ConformalMap::identity() { return ConformalMap(MapKind::laurent, {}, {}); }

ConformalMap ConformalMap::ellipse(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error("ellipse axes must be positive");
  if (a < b) throw Error("ellipse requires a >= b");
  return ConformalMap(MapKind::laurent, {Complex((a - b) / (a + b), 0.0)}, {});
}

ConformalMap ConformalMap::droplet() {
  std::vector<Complex> tail(kDropletTailTerms);
  double c = 0.25;
  for (auto& t : tail) {
    t = c;
    c *= -0.5;
  }
  return ConformalMap(MapKind::droplet, std::move(tail), {kPi});
}

ConformalMap ConformalMap::laurent(std::vector<Complex> tail) {
  if (!tail.empty() && std::abs(tail.front()) >= 1.0) {
    throw Error("laurent map requires |b_1| < 1");
  }
  ConformalMap map(MapKind::laurent, std::move(tail), {});
  if (map.tail_.empty()) return map;

  for (double r : {1.0 + 1e-3, 1.01, 1.1, 2.0}) {
    for (int q = 0; q < kInjectivitySamples; ++q) {
      const Complex zeta = std::polar(r, 2.0 * kPi * q / kInjectivitySamples);
      if (std::abs(map.derivative(zeta)) < 1e-12) {
        throw Error("laurent map is not injective: derivative vanishes outside the disk");
      }
    }
  }
  if (polygon_self_intersects(sample_boundary(map, kInjectivitySamples))) {
    throw Error("laurent map is not injective: boundary curve self-intersects");
  }
  return map;
}

Complex ConformalMap::operator()(Complex zeta) const {
  require_exterior(zeta);
  if (kind_ == MapKind::droplet) return zeta + 1.0 / (4.0 * zeta + 2.0);
  const Complex w = 1.0 / zeta;
  Complex acc{};
  for (auto it = tail_.rbegin(); it != tail_.rend(); ++it) acc = (acc + *it) * w;
  return zeta + acc;
}

Complex ConformalMap::derivative(Complex zeta) const {
  require_exterior(zeta);
  if (kind_ == MapKind::droplet) {
    const Complex s = 2.0 * zeta + 1.0;
    return 1.0 - 1.0 / (s * s);
  }
  // Phi' = 1 - sum k b_k zeta^{-k-1}
  const Complex w = 1.0 / zeta;
  Complex acc{};
  for (std::size_t k = tail_.size(); k >= 1; --k) {
    acc = (acc + static_cast<double>(k) * tail_[k - 1]) * w;
  }
  return 1.0 - acc * w;
}

Complex ConformalMap::second_derivative(Complex zeta) const {
  require_exterior(zeta);
  if (kind_ == MapKind::droplet) {
    const Complex s = 2.0 * zeta + 1.0;
    return 4.0 / (s * s * s);
  }
  // Phi'' = sum k(k+1) b_k zeta^{-k-2}
  const Complex w = 1.0 / zeta;
  Complex acc{};
  for (std::size_t k = tail_.size(); k >= 1; --k) {
    acc = (acc + static_cast<double>(k * (k + 1)) * tail_[k - 1]) * w;
  }
  return acc * w * w;
}

Complex ConformalMap::invert(Complex z) const {
  const double tol = 1e-12 * std::max(1.0, std::abs(z));

  auto newton = [&](Complex zeta, Complex& out) {
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      if (std::abs(zeta) < 1.0) zeta /= std::abs(zeta) * (1.0 - 1e-3);
      const Complex f = (*this)(zeta) - z;
      if (std::abs(f) <= tol) {
        out = zeta;
        return std::abs(zeta) > 1.0;
      }
      const Complex df = derivative(zeta);
      if (std::abs(df) == 0.0) return false;
      zeta -= f / df;
    }
    return false;
  };

  Complex result;
  const Complex seed = std::abs(z) >= 1.0 ? z : z / std::abs(z);
  if (newton(seed, result)) return result;
  const double radius = std::max(std::abs(z), 1.0 + 1e-3);
  for (int k = 0; k < 8; ++k) {
    if (newton(std::polar(radius, 2.0 * kPi * k / 8.0), result)) return result;
  }
  std::ostringstream msg;
  msg << "conformal inversion did not converge for z = " << z;
  throw Error(msg.str());
}

std::string ConformalMap::describe() const {
  std::ostringstream out;
  if (kind_ == MapKind::droplet) {
    out << "droplet: zeta + 1/(4 zeta + 2)";
    return out.str();
  }
  out << "laurent: zeta";
  for (std::size_t k = 0; k < tail_.size(); ++k) {
    out << " + (" << tail_[k].real() << (tail_[k].imag() < 0 ? "" : "+") << tail_[k].imag()
        << "i)/zeta^" << (k + 1);
  }
  return out.str();
}

Admissibility admissibility(const ConformalMap& map) {
  const Complex b = map.b1();
  return {b, std::abs(b), std::arg(b), std::abs(b) <= kMaxAdmissibleB};
}

std::vector<Complex> sample_boundary(const ConformalMap& map, int count) {
  std::vector<Complex> pts(count);
  for (int q = 0; q < count; ++q) pts[q] = map.boundary(2.0 * kPi * q / count);
  return pts;
}

bool polygon_self_intersects(std::span<const Complex> points) {
  const std::size_t n = points.size();
  if (n < 4) return false;
  // Bounding-box pruned brute force; n = 4096 is a few tens of milliseconds.
  struct Box {
    double x0, x1, y0, y1;
  };
  std::vector<Box> boxes(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Complex a = points[i], b = points[(i + 1) % n];
    boxes[i] = {std::min(a.real(), b.real()), std::max(a.real(), b.real()),
                std::min(a.imag(), b.imag()), std::max(a.imag(), b.imag())};
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      const Box& p = boxes[i];
      const Box& q = boxes[j];
      if (p.x1 < q.x0 || q.x1 < p.x0 || p.y1 < q.y0 || q.y1 < p.y0) continue;
      if (segments_cross(points[i], points[(i + 1) % n], points[j], points[(j + 1) % n])) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace neutral
