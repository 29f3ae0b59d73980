#include "lpi/shapes.hpp"

#include "lpi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace lpi {

namespace {

using Rng = std::mt19937_64;

Vec3 unit_vector(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(normal(rng), normal(rng), normal(rng));
  } while (v.squaredNorm() < 1e-24);
  return v.normalized();
}

double uniform(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Point on a tube of radius r around a circle of radius R (angle theta given),
// with the tube angle drawn by rejection so the density follows the area element.
void tube_point(Rng& rng, double ring, double tube, double theta, Vec3& p, Vec3& n) {
  double v = 0.0;
  do {
    v = 2.0 * std::numbers::pi * uniform(rng);
  } while (uniform(rng) * (ring + tube) > ring + tube * std::cos(v));
  const Vec3 radial(std::cos(theta), std::sin(theta), 0.0);
  n = std::cos(v) * radial + std::sin(v) * Vec3::UnitZ();
  p = ring * radial + tube * n;
}

class Sphere : public Shape {
 public:
  Sphere(double r, Vec3 c) : r_(r), c_(std::move(c)) {}
  std::string name() const override { return "sphere"; }
  double sdf(const Vec3& p) const override { return (p - c_).norm() - r_; }
  SampledSurface sample(std::size_t n, std::uint64_t seed) const override {
    Rng rng(seed);
    SampledSurface s;
    s.source = name();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 u = unit_vector(rng);
      s.points.push_back(c_ + r_ * u);
      s.normals.push_back(u);
    }
    return s;
  }

 private:
  double r_;
  Vec3 c_;
};

class Torus : public Shape {
 public:
  Torus(double ring, double tube) : ring_(ring), tube_(tube) {}
  std::string name() const override { return "torus"; }
  double sdf(const Vec3& p) const override {
    const double q = std::hypot(p.x(), p.y()) - ring_;
    return std::hypot(q, p.z()) - tube_;
  }
  SampledSurface sample(std::size_t n, std::uint64_t seed) const override {
    Rng rng(seed);
    SampledSurface s;
    s.source = name();
    for (std::size_t i = 0; i < n; ++i) {
      Vec3 p, nrm;
      tube_point(rng, ring_, tube_, 2.0 * std::numbers::pi * uniform(rng), p, nrm);
      s.points.push_back(p);
      s.normals.push_back(nrm);
    }
    return s;
  }

 private:
  double ring_, tube_;
};

class Dumbbell : public Shape {
 public:
  Dumbbell(double r, double x) : left_(r, Vec3(-x, 0, 0)), right_(r, Vec3(x, 0, 0)) {
    if (x <= r) throw InvalidArgument("dumbbell lobes must be disjoint");
  }
  std::string name() const override { return "dumbbell"; }
  double sdf(const Vec3& p) const override { return std::min(left_.sdf(p), right_.sdf(p)); }
  SampledSurface sample(std::size_t n, std::uint64_t seed) const override {
    Rng rng(seed);
    SampledSurface s;
    s.source = name();
    for (std::size_t i = 0; i < n; ++i) {
      const bool left = uniform(rng) < 0.5;
      const SampledSurface one = (left ? left_ : right_).sample(1, rng());
      s.points.push_back(one.points[0]);
      s.normals.push_back(one.normals[0]);
    }
    return s;
  }

 private:
  Sphere left_, right_;
};

class BentCylinder : public Shape {
 public:
  BentCylinder(double ring, double tube, double half) : ring_(ring), tube_(tube), half_(half) {
    if (half <= 0.0 || half >= std::numbers::pi) throw InvalidArgument("arc half-angle must lie in (0, pi)");
  }
  std::string name() const override { return "bent-cylinder"; }

  double sdf(const Vec3& p) const override { return arc_distance(p) - tube_; }

  SampledSurface sample(std::size_t n, std::uint64_t seed) const override {
    Rng rng(seed);
    SampledSurface s;
    s.source = name();
    const double tube_area = 2.0 * std::numbers::pi * tube_ * ring_ * 2.0 * half_;
    const double cap_area = 2.0 * std::numbers::pi * tube_ * tube_;  // each hemisphere
    const double total = tube_area + 2.0 * cap_area;
    for (std::size_t i = 0; i < n; ++i) {
      const double pick = uniform(rng) * total;
      Vec3 p, nrm;
      if (pick < tube_area) {
        tube_point(rng, ring_, tube_, -half_ + 2.0 * half_ * uniform(rng), p, nrm);
      } else {
        const double sign = pick < tube_area + cap_area ? 1.0 : -1.0;
        const double theta = sign * half_;
        const Vec3 end = ring_ * Vec3(std::cos(theta), std::sin(theta), 0.0);
        // Outward tangent at the arc end.
        const Vec3 out = sign * Vec3(-std::sin(theta), std::cos(theta), 0.0);
        nrm = unit_vector(rng);
        if (nrm.dot(out) < 0.0) nrm -= 2.0 * nrm.dot(out) * out;
        p = end + tube_ * nrm;
      }
      s.points.push_back(p);
      s.normals.push_back(nrm);
    }
    return s;
  }

 private:
  double arc_distance(const Vec3& p) const {
    const double rho = std::hypot(p.x(), p.y());
    const double phi = std::atan2(p.y(), p.x());
    if (rho > 0.0 && std::abs(phi) <= half_) return std::hypot(rho - ring_, p.z());
    const Vec3 a = ring_ * Vec3(std::cos(half_), std::sin(half_), 0.0);
    const Vec3 b = ring_ * Vec3(std::cos(half_), -std::sin(half_), 0.0);
    return std::min((p - a).norm(), (p - b).norm());
  }

  double ring_, tube_, half_;
};

class AxisBox : public Shape {
 public:
  explicit AxisBox(Vec3 half) : half_(std::move(half)) {}
  std::string name() const override { return "box"; }
  double sdf(const Vec3& p) const override {
    const Vec3 q = p.cwiseAbs() - half_;
    return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
  }
  SampledSurface sample(std::size_t n, std::uint64_t seed) const override {
    Rng rng(seed);
    SampledSurface s;
    s.source = name();
    // Face pair for axis k has area 4 * half[(k+1)%3] * half[(k+2)%3] each.
    const Vec3 area(half_.y() * half_.z(), half_.z() * half_.x(), half_.x() * half_.y());
    const double total = area.sum();
    for (std::size_t i = 0; i < n; ++i) {
      double pick = uniform(rng) * total;
      int axis = 0;
      while (axis < 2 && pick >= area[axis]) pick -= area[axis++];
      const double sign = uniform(rng) < 0.5 ? -1.0 : 1.0;
      Vec3 p;
      for (int k = 0; k < 3; ++k) p[k] = (2.0 * uniform(rng) - 1.0) * half_[k];
      p[axis] = sign * half_[axis];
      Vec3 nrm = Vec3::Zero();
      nrm[axis] = sign;
      s.points.push_back(p);
      s.normals.push_back(nrm);
    }
    return s;
  }

 private:
  Vec3 half_;
};

}  // namespace

std::unique_ptr<Shape> make_sphere(double r, const Vec3& c) { return std::make_unique<Sphere>(r, c); }
std::unique_ptr<Shape> make_torus(double ring, double tube) { return std::make_unique<Torus>(ring, tube); }
std::unique_ptr<Shape> make_dumbbell(double r, double x) { return std::make_unique<Dumbbell>(r, x); }
std::unique_ptr<Shape> make_bent_cylinder(double ring, double tube, double half_angle) {
  return std::make_unique<BentCylinder>(ring, tube, half_angle);
}
std::unique_ptr<Shape> make_box(const Vec3& half) { return std::make_unique<AxisBox>(half); }

std::vector<std::string> shape_names() { return {"sphere", "torus", "dumbbell", "bent-cylinder", "box"}; }

std::unique_ptr<Shape> make_shape(std::string_view name) {
  if (name == "sphere") return make_sphere();
  if (name == "torus") return make_torus();
  if (name == "dumbbell") return make_dumbbell();
  if (name == "bent-cylinder") return make_bent_cylinder();
  if (name == "box") return make_box();
  throw InvalidArgument("unknown shape '" + std::string(name) + "'");
}

PointCloud sample_cloud(const Shape& shape, std::size_t n, std::uint64_t seed) {
  PointCloud cloud;
  cloud.points = shape.sample(n, seed).points;
  return cloud;
}

}  // namespace lpi
