#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sfeval {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const { return *this / norm(); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

/// Direction on the unit sphere. Azimuth is measured counter-clockwise from
/// the front (+x), so +90 deg is left (+y); elevation is up-positive (+z).
/// Elevations outside [-90, 90] fold over the pole (az 0, el 135 is the same
/// direction as az 180, el 45).
class Direction {
 public:
  Direction() = default;

  static Direction from_degrees(double azimuth_deg, double elevation_deg);
  static Direction from_unit(const Vec3& v);

  double azimuth_deg() const { return az_; }
  double elevation_deg() const { return el_; }
  Vec3 unit() const;

  /// Great-circle distance to another direction, in degrees.
  double angle_to(const Direction& o) const;

 private:
  double az_ = 0.0;  // degrees, [-180, 180)
  double el_ = 0.0;  // degrees, [-90, 90]
};

/// Great-circle distance between unit vectors, in degrees.
double angle_between_deg(const Vec3& a, const Vec3& b);

/// A closed triangle mesh with vertices on the unit sphere.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;  // outward counter-clockwise
};

/// One level of a subdivision hierarchy. For level k >= 1, vertex
/// prev_count + j was inserted on the coarse edge parents[j], and
/// even_degree[i] counts the inserted vertices incident to coarse vertex i
/// (its edge degree in the coarser mesh).
struct HierarchyLevel {
  TriMesh mesh;
  std::vector<std::array<int, 2>> parents;
  std::vector<int> even_degree;
};

/// Nested spherical meshes from midpoint subdivision of a seed octahedron.
/// Level-k vertices keep their indices in every finer level.
class TriMeshHierarchy {
 public:
  explicit TriMeshHierarchy(std::vector<HierarchyLevel> levels)
      : levels_(std::move(levels)) {}

  int max_level() const { return static_cast<int>(levels_.size()) - 1; }
  int vertex_count(int level) const;
  const TriMesh& mesh(int level) const;
  const HierarchyLevel& level(int k) const;
  const TriMesh& finest() const { return levels_.back().mesh; }

 private:
  std::vector<HierarchyLevel> levels_;
};

/// Builds max_level+1 nested meshes from the canonical octahedron
/// (vertices on the coordinate axes). New vertices are edge midpoints
/// reprojected to the sphere. max_level must be in [0, 6].
TriMeshHierarchy build_octahedron_hierarchy(int max_level);

struct LoudspeakerLayout {
  std::string name;
  std::vector<Direction> directions;
  std::vector<Vec3> units;                    // cached unit vectors
  std::vector<std::array<int, 3>> triangles;  // convex-hull triangulation
  int size() const { return static_cast<int>(directions.size()); }
};

/// Loads one of the built-in layouts: "octahedron", "tdesign24", "lebedev50".
/// Node tables live in data/layouts/ next to the installed binary or under
/// the directory named by the SFEVAL_DATA_DIR environment variable.
LoudspeakerLayout load_layout(std::string_view name);

/// Loads a layout from a plain-text node table ("azimuth elevation" per
/// line, degrees, '#' comments) and triangulates it.
LoudspeakerLayout load_layout_file(const std::filesystem::path& path,
                                   std::string_view name);

/// Builds a layout from explicit directions (triangulated by convex hull).
LoudspeakerLayout make_layout(std::string_view name,
                              std::vector<Direction> directions);

struct TriangleLocation {
  int triangle = -1;
  std::array<double, 3> weights{};  // non-negative, sum to 1
};

/// Finds the spherical triangle containing d and its barycentric weights
/// (gnomonic projection onto the triangle plane, clipped at zero and
/// renormalised). Total on closed meshes; edge ties resolve to the lowest
/// triangle id.
TriangleLocation locate_triangle(const TriMesh& mesh, const Direction& d);
TriangleLocation locate_triangle(const std::vector<Vec3>& vertices,
                                 const std::vector<std::array<int, 3>>& triangles,
                                 const Vec3& d);

/// Convex-hull triangulation of points on the unit sphere, outward-oriented.
std::vector<std::array<int, 3>> convex_hull_triangulation(
    const std::vector<Vec3>& points);

/// Signed solid angle of a spherical triangle (van Oosterom & Strackee).
double triangle_solid_angle(const Vec3& a, const Vec3& b, const Vec3& c);

/// Sum of triangle solid angles; 4*pi for a covering triangulation.
double total_solid_angle(const std::vector<Vec3>& vertices,
                         const std::vector<std::array<int, 3>>& triangles);

/// Deterministic Fibonacci point set, used by tests and the synthetic
/// HRIR grid.
std::vector<Direction> fibonacci_grid(int count);

}  // namespace sfeval
