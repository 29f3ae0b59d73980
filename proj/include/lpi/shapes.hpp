#pragma once

#include "lpi/geom.hpp"
#include "lpi/metrics.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace lpi {

/// Closed analytic surface with an exact signed distance and uniform surface sampling.
class Shape {
 public:
  virtual ~Shape() = default;
  virtual std::string name() const = 0;
  virtual double sdf(const Vec3& p) const = 0;
  /// n points distributed uniformly by area, with outward unit normals.
  virtual SampledSurface sample(std::size_t n, std::uint64_t seed) const = 0;
};

/// Sphere of radius r around c.
std::unique_ptr<Shape> make_sphere(double r = 0.3, const Vec3& c = Vec3::Zero());
/// Torus in the xy-plane: ring radius R, tube radius r.
std::unique_ptr<Shape> make_torus(double ring = 0.25, double tube = 0.1);
/// Two disjoint spheres of radius r centered at (+-x, 0, 0).
std::unique_ptr<Shape> make_dumbbell(double r = 0.2, double x = 0.3);
/// Tube of radius `tube` around a circular arc of radius `ring` in the xy-plane,
/// spanning polar angles [-half_angle, half_angle], closed by hemispherical caps.
std::unique_ptr<Shape> make_bent_cylinder(double ring = 0.3, double tube = 0.06, double half_angle = 0.85 * 3.14159265358979323846);
/// Axis-aligned box with the given half extents.
std::unique_ptr<Shape> make_box(const Vec3& half = Vec3(0.3, 0.2, 0.15));

/// Lookup by name: sphere, torus, dumbbell, bent-cylinder, box.
std::unique_ptr<Shape> make_shape(std::string_view name);
std::vector<std::string> shape_names();

/// Surface samples as an unlabeled point cloud.
PointCloud sample_cloud(const Shape& shape, std::size_t n, std::uint64_t seed);

}  // namespace lpi
