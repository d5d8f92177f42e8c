#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace uhm {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

double distance(const Point3& a, const Point3& b);
double norm(const Point3& p);

/// Weighted point cloud. Each index carries a location and a positive
/// surface-measure weight standing in for the support of a basis function.
struct Geometry {
  std::vector<Point3> points;
  std::vector<double> weights;
  std::string label;

  std::size_t size() const noexcept { return points.size(); }

  friend bool operator==(const Geometry&, const Geometry&) = default;
};

/// Axis-aligned bounding box, lo <= hi componentwise.
struct AABB {
  Point3 lo;
  Point3 hi;

  bool contains(const Point3& p) const noexcept;
};

// Fibonacci lattice on a sphere centred at the origin. The seed rotates the
// lattice rigidly, so spacing does not depend on it.
Geometry generate_sphere(std::size_t n, double radius, std::uint64_t seed);

/// Points on a tube of radius `r` around the (p, q) torus knot with major
/// radius `R` and minor radius `R / 2`.
Geometry generate_torus_knot(std::size_t n, int p, int q, double R, double r,
                             std::uint64_t seed = 0);

/// Point on the center curve of the torus knot used by generate_torus_knot.
Point3 torus_knot_curve(double t, int p, int q, double R);

/// Reads `x y z w` rows; `#` starts a comment line.
Geometry load_points(const std::filesystem::path& path);

void save_points(const Geometry& geometry, const std::filesystem::path& path);

AABB bbox(const Geometry& geometry, std::span<const std::size_t> indices);
AABB bbox(const Geometry& geometry);

double aabb_diam(const AABB& b);
double aabb_dist(const AABB& a, const AABB& b);

// Largest distance from any point to its nearest neighbour. Used as the mesh
// width h when a wavenumber is specified as kappa*h.
double max_nearest_neighbor_spacing(const Geometry& geometry);
double min_pairwise_distance(const Geometry& geometry);

} // namespace uhm
