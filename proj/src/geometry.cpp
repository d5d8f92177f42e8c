#include "uhm/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

#include "uhm/errors.hpp"

namespace uhm {

namespace {

Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Point3 operator*(double s, const Point3& a) { return {s * a.x, s * a.y, s * a.z}; }
double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Point3 cross(const Point3& a, const Point3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
Point3 normalized(const Point3& a) { return (1.0 / norm(a)) * a; }

// Uniformly distributed rotation (Shoemake's unit quaternion sampling).
std::array<Point3, 3> random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u1 = uni(rng), u2 = uni(rng), u3 = uni(rng);
  const double two_pi = 2.0 * std::numbers::pi;
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const double w = a * std::sin(two_pi * u2), x = a * std::cos(two_pi * u2);
  const double y = b * std::sin(two_pi * u3), z = b * std::cos(two_pi * u3);
  return {Point3{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
          Point3{2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
          Point3{2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}};
}

Point3 torus_knot_tangent(double t, int p, int q, double R) {
  const double a = 0.5 * R;
  const double rad = R + a * std::cos(q * t);
  const double drad = -a * q * std::sin(q * t);
  return {drad * std::cos(p * t) - rad * p * std::sin(p * t),
          drad * std::sin(p * t) + rad * p * std::cos(p * t), a * q * std::cos(q * t)};
}

bool finite(const Point3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

// Uniform hashing grid for nearest-neighbour queries on surface-like clouds.
class PointGrid {
public:
  explicit PointGrid(const Geometry& g) : g_(g) {
    box_ = bbox(g);
    const double diag = std::max(aabb_diam(box_), 1e-300);
    cell_ = 2.0 * diag / std::sqrt(static_cast<double>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) cells_[key(cell_of(g.points[i]))].push_back(i);
    const double extent = std::max({box_.hi.x - box_.lo.x, box_.hi.y - box_.lo.y, box_.hi.z - box_.lo.z});
    max_ring_ = static_cast<long>(extent / cell_) + 2;
  }

  double nearest_distance(std::size_t i) const {
    const auto c = cell_of(g_.points[i]);
    double best = std::numeric_limits<double>::infinity();
    for (long r = 0; r <= max_ring_; ++r) {
      for (long dx = -r; dx <= r; ++dx)
        for (long dy = -r; dy <= r; ++dy)
          for (long dz = -r; dz <= r; ++dz) {
            if (std::max({std::labs(dx), std::labs(dy), std::labs(dz)}) != r) continue;
            auto it = cells_.find(key({c[0] + dx, c[1] + dy, c[2] + dz}));
            if (it == cells_.end()) continue;
            for (std::size_t j : it->second)
              if (j != i) best = std::min(best, distance(g_.points[i], g_.points[j]));
          }
      if (best <= static_cast<double>(r) * cell_) break;
    }
    return best;
  }

private:
  std::array<long, 3> cell_of(const Point3& p) const {
    return {static_cast<long>((p.x - box_.lo.x) / cell_), static_cast<long>((p.y - box_.lo.y) / cell_),
            static_cast<long>((p.z - box_.lo.z) / cell_)};
  }
  static std::uint64_t key(const std::array<long, 3>& c) {
    const auto u = [](long v) { return static_cast<std::uint64_t>(v + (1L << 20)) & 0x1FFFFF; };
    return (u(c[0]) << 42) | (u(c[1]) << 21) | u(c[2]);
  }

  const Geometry& g_;
  AABB box_;
  double cell_ = 1.0;
  long max_ring_ = 1;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

} // namespace

double distance(const Point3& a, const Point3& b) { return norm(a - b); }

double norm(const Point3& p) { return std::sqrt(dot(p, p)); }

bool AABB::contains(const Point3& p) const noexcept {
  return lo.x <= p.x && p.x <= hi.x && lo.y <= p.y && p.y <= hi.y && lo.z <= p.z && p.z <= hi.z;
}

Geometry generate_sphere(std::size_t n, double radius, std::uint64_t seed) {
  if (n == 0) throw invalid_argument("generate_sphere: n must be >= 1");
  if (!(radius > 0.0)) throw invalid_argument("generate_sphere: radius must be > 0");

  std::mt19937_64 rng(seed);
  const auto rot = random_rotation(rng);
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));

  Geometry g;
  g.label = "sphere";
  g.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * static_cast<double>(i);
    const Point3 p{rho * std::cos(phi), rho * std::sin(phi), z};
    const Point3 q{dot(rot[0], p), dot(rot[1], p), dot(rot[2], p)};
    g.points.push_back((radius / norm(q)) * q);
  }
  g.weights.assign(n, 4.0 * std::numbers::pi * radius * radius / static_cast<double>(n));
  return g;
}

Point3 torus_knot_curve(double t, int p, int q, double R) {
  const double a = 0.5 * R;
  const double rad = R + a * std::cos(q * t);
  return {rad * std::cos(p * t), rad * std::sin(p * t), a * std::sin(q * t)};
}

Geometry generate_torus_knot(std::size_t n, int p, int q, double R, double r, std::uint64_t seed) {
  if (n == 0) throw invalid_argument("generate_torus_knot: n must be >= 1");
  if (p < 1 || q < 1) throw invalid_argument("generate_torus_knot: p and q must be >= 1");
  if (!(r > 0.0) || !(R > r)) throw invalid_argument("generate_torus_knot: need R > r > 0");

  const double two_pi = 2.0 * std::numbers::pi;
  constexpr int kLengthSamples = 20000;
  double length = 0.0;
  Point3 prev = torus_knot_curve(0.0, p, q, R);
  for (int s = 1; s <= kLengthSamples; ++s) {
    const Point3 cur = torus_knot_curve(two_pi * s / kLengthSamples, p, q, R);
    length += distance(prev, cur);
    prev = cur;
  }

  std::mt19937_64 rng(seed);
  const double phase = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);

  Geometry g;
  g.label = "torus_knot(" + std::to_string(p) + "," + std::to_string(q) + ")";
  g.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = two_pi * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    double frac = phase + golden * static_cast<double>(i);
    frac -= std::floor(frac);
    const double theta = two_pi * frac;

    const Point3 c = torus_knot_curve(t, p, q, R);
    const Point3 tan = normalized(torus_knot_tangent(t, p, q, R));
    Point3 helper{1.0, 0.0, 0.0};
    if (std::abs(tan.y) <= std::abs(tan.x) && std::abs(tan.y) <= std::abs(tan.z)) helper = {0.0, 1.0, 0.0};
    else if (std::abs(tan.z) <= std::abs(tan.x)) helper = {0.0, 0.0, 1.0};
    const Point3 nrm = normalized(helper - dot(helper, tan) * tan);
    const Point3 bin = cross(tan, nrm);
    g.points.push_back(c + (r * std::cos(theta)) * nrm + (r * std::sin(theta)) * bin);
  }
  g.weights.assign(n, two_pi * r * length / static_cast<double>(n));
  return g;
}

Geometry load_points(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw invalid_argument("load_points: cannot open " + path.string());

  Geometry g;
  g.label = path.filename().string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream row(line);
    Point3 pt;
    double w = 0.0;
    if (!(row >> pt.x >> pt.y >> pt.z >> w)) throw parse_error("load_points: expected `x y z w`", lineno);
    std::string rest;
    if (row >> rest) throw parse_error("load_points: trailing data `" + rest + "`", lineno);
    if (!finite(pt) || !std::isfinite(w)) throw invalid_data("load_points: non-finite value", lineno);
    if (!(w > 0.0)) throw invalid_data("load_points: weight must be positive", lineno);
    g.points.push_back(pt);
    g.weights.push_back(w);
  }
  if (g.points.empty()) throw invalid_data("load_points: no points in " + path.string(), lineno);
  return g;
}

void save_points(const Geometry& geometry, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw invalid_argument("save_points: cannot open " + path.string());
  out << "# " << geometry.label << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < geometry.size(); ++i) {
    const auto& p = geometry.points[i];
    out << p.x << ' ' << p.y << ' ' << p.z << ' ' << geometry.weights[i] << '\n';
  }
}

AABB bbox(const Geometry& geometry, std::span<const std::size_t> indices) {
  if (indices.empty()) throw invalid_argument("bbox: empty index subset");
  AABB box{geometry.points.at(indices[0]), geometry.points.at(indices[0])};
  for (std::size_t i : indices) {
    const Point3& p = geometry.points.at(i);
    box.lo = {std::min(box.lo.x, p.x), std::min(box.lo.y, p.y), std::min(box.lo.z, p.z)};
    box.hi = {std::max(box.hi.x, p.x), std::max(box.hi.y, p.y), std::max(box.hi.z, p.z)};
  }
  return box;
}

AABB bbox(const Geometry& geometry) {
  std::vector<std::size_t> all(geometry.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return bbox(geometry, all);
}

double aabb_diam(const AABB& b) { return norm(b.hi - b.lo); }

double aabb_dist(const AABB& a, const AABB& b) {
  const auto gap = [](double alo, double ahi, double blo, double bhi) {
    return std::max({0.0, blo - ahi, alo - bhi});
  };
  const Point3 d{gap(a.lo.x, a.hi.x, b.lo.x, b.hi.x), gap(a.lo.y, a.hi.y, b.lo.y, b.hi.y),
                 gap(a.lo.z, a.hi.z, b.lo.z, b.hi.z)};
  return norm(d);
}

double max_nearest_neighbor_spacing(const Geometry& geometry) {
  if (geometry.size() < 2) return 0.0;
  const PointGrid grid(geometry);
  double h = 0.0;
  for (std::size_t i = 0; i < geometry.size(); ++i) h = std::max(h, grid.nearest_distance(i));
  return h;
}

double min_pairwise_distance(const Geometry& geometry) {
  if (geometry.size() < 2) return std::numeric_limits<double>::infinity();
  const PointGrid grid(geometry);
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < geometry.size(); ++i) d = std::min(d, grid.nearest_distance(i));
  return d;
}

} // namespace uhm
